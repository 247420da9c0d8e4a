#pragma once

// Seeded graph generators for fixtures and evaluation runs. All kinds
// populate the degree feature from the built structure and never exceed its
// cardinality; generation is deterministic in the seed.

#include <grain/common.hpp>
#include <grain/graph.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace grain {

enum class GeneratorKind {
  random_tree,
  erdos_renyi,
  molecule_like,    // degrees capped at 4, skewed toward 1..3
  unique_features,  // pairwise-distinct node feature vectors
  twin_leaves,      // a tree plus one duplicated leaf: the normalized
                    // adjacency has two identical rows (rank-deficient)
};

inline const char* generator_kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::random_tree: return "random_tree";
    case GeneratorKind::erdos_renyi: return "erdos_renyi";
    case GeneratorKind::molecule_like: return "molecule_like";
    case GeneratorKind::unique_features: return "unique_features";
    case GeneratorKind::twin_leaves: return "twin_leaves";
  }
  return "unknown";
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::random_tree;
  int n = 8;
  double edge_prob = 0.0;  // extra-edge probability (tree-based kinds) or
                           // edge probability (erdos_renyi)
  int max_degree = 4;
  std::vector<int> feature_cardinalities = {4, 5};  // non-degree features
  int num_classes = 2;
  Task task = Task::graph_classification;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "generator: n must be >= 1");
    if (max_degree < 1)
      throw Error(ErrorCode::invalid_argument, "generator: max_degree must be >= 1");
    if (edge_prob < 0.0 || edge_prob > 1.0)
      throw Error(ErrorCode::invalid_argument, "generator: edge_prob outside [0,1]");
    for (int c : feature_cardinalities) {
      if (c < 1)
        throw Error(ErrorCode::invalid_argument,
                    "generator: feature cardinality must be >= 1");
    }
  }
};

namespace detail {

inline SchemaPtr generator_schema(const GeneratorSpec& spec) {
  FeatureSchema schema;
  for (std::size_t i = 0; i < spec.feature_cardinalities.size(); ++i) {
    schema.features.push_back(
        {"f" + std::to_string(i), spec.feature_cardinalities[i]});
  }
  schema.features.push_back({"degree", spec.max_degree + 1});
  schema.degree_feature_index = static_cast<int>(schema.features.size()) - 1;
  schema.num_classes = spec.num_classes;
  schema.task = spec.task;
  return make_schema(std::move(schema));
}

// Uniform spanning-tree-ish growth: each new node attaches to a uniformly
// chosen earlier node that still has degree capacity.
inline std::vector<Edge> grow_tree(int n, int max_degree, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<int> degree(n, 0);
  for (int i = 1; i < n; ++i) {
    std::vector<int> eligible;
    for (int j = 0; j < i; ++j) {
      if (degree[j] < max_degree) eligible.push_back(j);
    }
    if (eligible.empty())
      throw Error(ErrorCode::infeasible,
                  "tree growth stuck: max_degree too small for n");
    const int j = eligible[rng.below(eligible.size())];
    edges.push_back(normalized_edge(j, i));
    ++degree[j];
    ++degree[i];
  }
  return edges;
}

// Extra edges between non-adjacent pairs, respecting the degree cap.
inline void add_extra_edges(std::vector<Edge>& edges, int n, int max_degree,
                            double prob, Rng& rng) {
  if (prob <= 0.0) return;
  std::vector<int> degree(n, 0);
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& e : edges) {
    ++degree[e.first];
    ++degree[e.second];
    adj[e.first][e.second] = adj[e.second][e.first] = 1;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adj[i][j]) continue;
      if (degree[i] >= max_degree || degree[j] >= max_degree) continue;
      if (rng.uniform() < prob) {
        edges.push_back({i, j});
        ++degree[i];
        ++degree[j];
        adj[i][j] = adj[j][i] = 1;
      }
    }
  }
}

inline std::vector<int> structural_degrees(const std::vector<Edge>& edges, int n) {
  std::vector<int> degree(n, 0);
  for (const auto& e : edges) {
    ++degree[e.first];
    ++degree[e.second];
  }
  return degree;
}

}  // namespace detail

// Deterministic graph generation from the spec's seed. The degree feature is
// always set to the structural degree.
inline Graph generate(const GeneratorSpec& spec) {
  spec.validate();
  SchemaPtr schema = detail::generator_schema(spec);
  Rng rng(spec.seed);
  const int n = spec.n;

  std::vector<Edge> edges;
  std::vector<NodeFeatures> nodes;
  switch (spec.kind) {
    case GeneratorKind::random_tree: {
      if (n > 1) edges = detail::grow_tree(n, spec.max_degree, rng);
      detail::add_extra_edges(edges, n, spec.max_degree, spec.edge_prob, rng);
      break;
    }
    case GeneratorKind::erdos_renyi: {
      std::vector<int> degree(n, 0);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (degree[i] >= spec.max_degree || degree[j] >= spec.max_degree) continue;
          if (rng.uniform() < spec.edge_prob) {
            edges.push_back({i, j});
            ++degree[i];
            ++degree[j];
          }
        }
      }
      break;
    }
    case GeneratorKind::molecule_like: {
      const int cap = std::min(spec.max_degree, 4);
      if (n > 1) edges = detail::grow_tree(n, cap, rng);
      // A light sprinkle of ring-closing edges keeps degrees skewed low.
      detail::add_extra_edges(edges, n, cap,
                              spec.edge_prob > 0.0 ? spec.edge_prob : 0.05, rng);
      break;
    }
    case GeneratorKind::unique_features: {
      if (n > 1) edges = detail::grow_tree(n, spec.max_degree, rng);
      detail::add_extra_edges(edges, n, spec.max_degree, spec.edge_prob, rng);
      break;
    }
    case GeneratorKind::twin_leaves: {
      if (n < 3)
        throw Error(ErrorCode::invalid_argument, "twin_leaves needs n >= 3");
      // Build a tree on n-1 nodes, then duplicate one leaf into a triangle
      // with its parent. Mutually adjacent twins share their closed
      // neighborhood (and features, copied below), so the normalized
      // adjacency gets two identical rows: deliberately rank-deficient.
      edges = detail::grow_tree(n - 1, spec.max_degree - 1, rng);
      break;
    }
  }

  const int degree_cap = schema->max_declared_degree();
  auto finish_features = [&](const std::vector<int>& degree) {
    for (int i = 0; i < n; ++i) {
      NodeFeatures f;
      for (int c : spec.feature_cardinalities) f.push_back(static_cast<int>(rng.below(c)));
      f.push_back(std::min(degree[i], degree_cap));
      nodes.push_back(std::move(f));
    }
  };

  if (spec.kind == GeneratorKind::unique_features) {
    // Enumerate the non-degree feature space, shuffle, take n distinct combos.
    std::uint64_t space = 1;
    for (int c : spec.feature_cardinalities) {
      space *= static_cast<std::uint64_t>(c);
      if (space > 1000000)
        throw Error(ErrorCode::cap_exceeded, "unique_features: feature space too large");
    }
    if (space < static_cast<std::uint64_t>(n))
      throw Error(ErrorCode::infeasible,
                  "unique_features: feature space smaller than n");
    std::vector<std::uint64_t> combos(space);
    for (std::uint64_t i = 0; i < space; ++i) combos[i] = i;
    rng.shuffle(combos);
    const auto degree = detail::structural_degrees(edges, n);
    for (int i = 0; i < n; ++i) {
      NodeFeatures f;
      std::uint64_t code = combos[i];
      for (int c : spec.feature_cardinalities) {
        f.push_back(static_cast<int>(code % static_cast<std::uint64_t>(c)));
        code /= static_cast<std::uint64_t>(c);
      }
      f.push_back(std::min(degree[i], degree_cap));
      nodes.push_back(std::move(f));
    }
  } else if (spec.kind == GeneratorKind::twin_leaves) {
    // Pick a leaf of the (n-1)-node tree, append its twin.
    const auto degree = detail::structural_degrees(edges, n - 1);
    int leaf = -1;
    for (int i = n - 2; i >= 1; --i) {
      if (degree[i] == 1) {
        leaf = i;
        break;
      }
    }
    if (leaf < 0) leaf = n - 2;
    int parent = -1;
    for (const auto& e : edges) {
      if (e.first == leaf) parent = e.second;
      if (e.second == leaf) parent = e.first;
      if (parent >= 0) break;
    }
    edges.push_back(normalized_edge(parent, n - 1));
    edges.push_back(normalized_edge(leaf, n - 1));
    const auto full_degree = detail::structural_degrees(edges, n);
    for (int i = 0; i < n; ++i) {
      NodeFeatures f;
      for (int c : spec.feature_cardinalities) f.push_back(static_cast<int>(rng.below(c)));
      f.push_back(std::min(full_degree[i], degree_cap));
      nodes.push_back(std::move(f));
    }
    // Twins must agree on every feature.
    nodes[n - 1] = nodes[leaf];
  } else {
    const auto degree = detail::structural_degrees(edges, n);
    finish_features(degree);
  }

  return Graph(schema, std::move(nodes), std::move(edges));
}

}  // namespace grain
