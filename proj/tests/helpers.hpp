#pragma once

// Shared fixtures for the test suites: small schemas, random graphs with
// consistent declared degrees, and permuted copies.

#include <grain/graph.hpp>

#include <algorithm>
#include <vector>

namespace testutil {

using namespace grain;

inline SchemaPtr small_schema(int color_card = 3, int max_degree = 3,
                              int num_classes = 2,
                              Task task = Task::graph_classification) {
  FeatureSchema s;
  s.features.push_back({"color", color_card});
  s.features.push_back({"degree", max_degree + 1});
  s.degree_feature_index = 1;
  s.num_classes = num_classes;
  s.task = task;
  return make_schema(std::move(s));
}

inline SchemaPtr wide_schema(int c0 = 6, int c1 = 6, int max_degree = 4,
                             int num_classes = 2,
                             Task task = Task::graph_classification) {
  FeatureSchema s;
  s.features.push_back({"f0", c0});
  s.features.push_back({"f1", c1});
  s.features.push_back({"degree", max_degree + 1});
  s.degree_feature_index = 2;
  s.num_classes = num_classes;
  s.task = task;
  return make_schema(std::move(s));
}

// Connected random graph; declared degrees always equal structural degrees.
inline Graph random_graph(Rng& rng, int n, const SchemaPtr& schema,
                          int max_degree, double extra_prob = 0.15) {
  std::vector<Edge> edges;
  std::vector<int> deg(n, 0);
  for (int v = 1; v < n; ++v) {
    std::vector<int> eligible;
    for (int u = 0; u < v; ++u)
      if (deg[u] < max_degree) eligible.push_back(u);
    const int u = eligible[rng.below(eligible.size())];
    edges.push_back({u, v});
    ++deg[u];
    ++deg[v];
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (deg[u] < max_degree && deg[v] < max_degree && rng.uniform() < extra_prob &&
          std::find(edges.begin(), edges.end(), normalized_edge(u, v)) ==
              edges.end()) {
        edges.push_back({u, v});
        ++deg[u];
        ++deg[v];
      }
    }
  }
  std::vector<NodeFeatures> nodes(n);
  const int non_degree = schema->num_features() - 1;
  for (int v = 0; v < n; ++v) {
    NodeFeatures f;
    for (int k = 0; k < schema->num_features(); ++k) {
      if (k == schema->degree_feature_index) {
        f.push_back(deg[v]);
      } else {
        f.push_back(static_cast<int>(rng.below(schema->features[k].cardinality)));
      }
    }
    (void)non_degree;
    nodes[v] = std::move(f);
  }
  return Graph(schema, std::move(nodes), std::move(edges));
}

// Relabels nodes by a random permutation; perm_out[old] = new.
inline Graph permuted_copy(const Graph& g, Rng& rng,
                           std::vector<int>* perm_out = nullptr) {
  const int n = g.n();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<NodeFeatures> nodes(n);
  for (int v = 0; v < n; ++v) nodes[perm[v]] = g.node(v);
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    edges.push_back(normalized_edge(perm[e.first], perm[e.second]));
  if (perm_out) *perm_out = perm;
  return Graph(g.schema(), std::move(nodes), std::move(edges));
}

}  // namespace testutil
