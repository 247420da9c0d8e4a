#pragma once

// Graph values and neighborhood machinery. Graphs are immutable once built:
// undirected, simple (no self-loops, no parallel edges), nodes carry discrete
// features per a shared schema. A node's *declared* degree is the value of its
// degree feature; its *structural* degree is the number of incident edges.
// Partial graphs (building blocks mid-reconstruction) may declare more than
// they structurally have; the gap is what "dangling" measures.

#include <grain/common.hpp>
#include <grain/schema.hpp>

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grain {

using Edge = std::pair<int, int>;

inline Edge normalized_edge(int a, int b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

class Graph {
 public:
  Graph(SchemaPtr schema, std::vector<NodeFeatures> nodes, std::vector<Edge> edges)
      : schema_(std::move(schema)), nodes_(std::move(nodes)) {
    if (!schema_) throw Error(ErrorCode::invalid_argument, "graph requires a schema");
    for (const auto& f : nodes_) schema_->validate_features(f);
    const int n = static_cast<int>(nodes_.size());
    for (auto& e : edges) {
      if (e.first == e.second)
        throw Error(ErrorCode::invalid_graph,
                    "self-edge at node " + std::to_string(e.first));
      if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
        throw Error(ErrorCode::invalid_graph,
                    "edge (" + std::to_string(e.first) + "," +
                        std::to_string(e.second) + ") references a missing node");
      e = normalized_edge(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    adj_.assign(n, {});
    for (const auto& e : edges_) {
      adj_[e.first].push_back(e.second);
      adj_[e.second].push_back(e.first);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    const int max_deg = schema_->max_declared_degree();
    for (int i = 0; i < n; ++i) {
      if (structural_degree(i) > max_deg)
        throw Error(ErrorCode::invalid_graph,
                    "node " + std::to_string(i) +
                        " has structural degree beyond the degree feature range");
    }
  }

  int n() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const SchemaPtr& schema() const { return schema_; }
  const std::vector<NodeFeatures>& nodes() const { return nodes_; }
  const NodeFeatures& node(int i) const { return nodes_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }

  int structural_degree(int i) const { return static_cast<int>(adj_[i].size()); }
  int declared_degree(int i) const {
    return nodes_[i][schema_->degree_feature_index];
  }

  bool has_edge(int a, int b) const {
    const auto& nb = adj_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  bool operator==(const Graph& o) const {
    return *schema_ == *o.schema_ && nodes_ == o.nodes_ && edges_ == o.edges_;
  }

 private:
  SchemaPtr schema_;
  std::vector<NodeFeatures> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

// Nodes whose declared degree exceeds their structural degree, ascending.
inline std::vector<int> dangling_nodes(const Graph& g) {
  std::vector<int> out;
  for (int i = 0; i < g.n(); ++i) {
    if (g.declared_degree(i) > g.structural_degree(i)) out.push_back(i);
  }
  return out;
}

inline int dangling_deficit(const Graph& g, int i) {
  return g.declared_degree(i) - g.structural_degree(i);
}

// BFS distances from a start node; unreachable nodes get -1.
inline std::vector<int> bfs_distances(const Graph& g, int start) {
  std::vector<int> dist(g.n(), -1);
  std::deque<int> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// A rooted partial graph: `center` is the node the block was extracted (or
// grown) around, `hop` the radius it is meant to cover.
struct BuildingBlock {
  Graph graph;
  int center = 0;
  int hop = 0;
};

// The k-hop neighborhood of v: nodes within distance k, and every edge lying
// on a <=k-step walk from v (equivalently, all edges with at least one
// endpoint at distance <= k-1). Edges between two distance-k nodes are NOT
// part of the neighborhood. Nodes are re-indexed by (distance, original
// index), so the center lands at index 0.
inline BuildingBlock k_hop_neighborhood(const Graph& g, int v, int k) {
  if (v < 0 || v >= g.n())
    throw Error(ErrorCode::invalid_argument, "k_hop_neighborhood: node out of range");
  if (k < 0)
    throw Error(ErrorCode::invalid_argument, "k_hop_neighborhood: negative radius");
  const auto dist = bfs_distances(g, v);
  std::vector<int> keep;
  for (int i = 0; i < g.n(); ++i) {
    if (dist[i] >= 0 && dist[i] <= k) keep.push_back(i);
  }
  std::stable_sort(keep.begin(), keep.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  std::vector<int> remap(g.n(), -1);
  std::vector<NodeFeatures> nodes;
  nodes.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    remap[keep[i]] = static_cast<int>(i);
    nodes.push_back(g.node(keep[i]));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.first] < 0 || remap[e.second] < 0) continue;
    if (dist[e.first] <= k - 1 || dist[e.second] <= k - 1)
      edges.push_back(normalized_edge(remap[e.first], remap[e.second]));
  }
  return BuildingBlock{Graph(g.schema(), std::move(nodes), std::move(edges)), 0, k};
}

// Checks the structural promise of a building block: connected within `hop`
// of the center and no edge between two boundary (distance == hop) nodes.
inline bool building_block_valid(const BuildingBlock& b) {
  if (b.center < 0 || b.center >= b.graph.n() || b.hop < 0) return false;
  const auto dist = bfs_distances(b.graph, b.center);
  for (int i = 0; i < b.graph.n(); ++i) {
    if (dist[i] < 0 || dist[i] > b.hop) return false;
  }
  for (const auto& e : b.graph.edges()) {
    if (dist[e.first] >= b.hop && dist[e.second] >= b.hop) return false;
  }
  return true;
}

namespace detail {

inline void append_features(std::string& out, const NodeFeatures& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(f[i]);
  }
}

}  // namespace detail

// Exact serialization of a graph as stored (order-sensitive). Deterministic,
// cheap, and distinct for non-identical representations; used for total
// ordering and as a memoization key.
inline std::string exact_key(const Graph& g) {
  std::string out;
  out.reserve(static_cast<std::size_t>(g.n()) * 8 + g.edges().size() * 8);
  out += std::to_string(g.n());
  out.push_back('|');
  for (int i = 0; i < g.n(); ++i) {
    detail::append_features(out, g.node(i));
    out.push_back(';');
  }
  out.push_back('|');
  for (const auto& e : g.edges()) {
    out += std::to_string(e.first);
    out.push_back('-');
    out += std::to_string(e.second);
    out.push_back(';');
  }
  return out;
}

inline std::string exact_key(const BuildingBlock& b) {
  return std::to_string(b.hop) + ':' + std::to_string(b.center) + ':' +
         exact_key(b.graph);
}

// Isomorphism-invariant fingerprint: sorted per-node signatures of
// (features, structural degree, sorted neighbor features). Equal for
// isomorphic graphs; collisions possible, so use as a bucket key before an
// exact isomorphism check.
inline std::string iso_invariant_key(const Graph& g) {
  std::vector<std::string> sigs(g.n());
  for (int i = 0; i < g.n(); ++i) {
    std::string s;
    detail::append_features(s, g.node(i));
    s.push_back('/');
    s += std::to_string(g.structural_degree(i));
    s.push_back('/');
    std::vector<std::string> nb;
    for (int w : g.neighbors(i)) {
      std::string t;
      detail::append_features(t, g.node(w));
      nb.push_back(std::move(t));
    }
    std::sort(nb.begin(), nb.end());
    for (const auto& t : nb) {
      s += t;
      s.push_back('+');
    }
    sigs[i] = std::move(s);
  }
  std::sort(sigs.begin(), sigs.end());
  std::string out = std::to_string(g.n()) + '|' + std::to_string(g.num_edges()) + '|';
  for (const auto& s : sigs) {
    out += s;
    out.push_back('#');
  }
  return out;
}

// Invariant key for rooted blocks: node signatures additionally carry the
// BFS distance from the center.
inline std::string block_invariant_key(const BuildingBlock& b) {
  const auto dist = bfs_distances(b.graph, b.center);
  std::vector<std::string> sigs(b.graph.n());
  for (int i = 0; i < b.graph.n(); ++i) {
    std::string s = std::to_string(dist[i]);
    s.push_back('@');
    detail::append_features(s, b.graph.node(i));
    s.push_back('/');
    s += std::to_string(b.graph.structural_degree(i));
    sigs[i] = std::move(s);
  }
  std::sort(sigs.begin(), sigs.end());
  std::string out = std::to_string(b.hop) + '|';
  out += std::to_string(b.graph.num_edges());
  out.push_back('|');
  for (const auto& s : sigs) {
    out += s;
    out.push_back('#');
  }
  return out;
}

// Feature-preserving graph isomorphism, optionally with pre-pinned node pairs
// (used to force center-to-center mappings for rooted blocks). Backtracking
// over candidate nodes with matching features and structural degree;
// adjacency must be preserved in both directions.
inline bool feature_isomorphic(
    const Graph& g1, const Graph& g2,
    const std::vector<std::pair<int, int>>& pinned = {}) {
  if (!(*g1.schema() == *g2.schema())) return false;
  const int n = g1.n();
  if (n != g2.n() || g1.num_edges() != g2.num_edges()) return false;
  {
    auto a = g1.nodes();
    auto b = g2.nodes();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
  }

  std::vector<std::vector<int>> cand(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < g2.n(); ++j) {
      if (g1.node(i) == g2.node(j) &&
          g1.structural_degree(i) == g2.structural_degree(j))
        cand[i].push_back(j);
    }
    if (cand[i].empty()) return false;
  }

  std::vector<int> map1(n, -1), map2(n, -1);
  for (const auto& [a, b] : pinned) {
    if (a < 0 || a >= n || b < 0 || b >= n) return false;
    if (std::find(cand[a].begin(), cand[a].end(), b) == cand[a].end()) return false;
    map1[a] = b;
    map2[b] = a;
  }

  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (map1[i] < 0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return cand[a].size() < cand[b].size();
  });

  // Prefer nodes adjacent to the already-mapped frontier to fail fast.
  std::vector<int> seq;
  std::vector<char> placed(n, 0);
  for (const auto& [a, b] : pinned) {
    (void)b;
    placed[a] = 1;
  }
  while (seq.size() < order.size()) {
    int pick = -1;
    for (int v : order) {
      if (placed[v]) continue;
      bool touches = false;
      for (int w : g1.neighbors(v)) {
        if (placed[w]) {
          touches = true;
          break;
        }
      }
      if (touches) {
        pick = v;
        break;
      }
    }
    if (pick < 0) {
      for (int v : order) {
        if (!placed[v]) {
          pick = v;
          break;
        }
      }
    }
    placed[pick] = 1;
    seq.push_back(pick);
  }

  std::function<bool(std::size_t)> rec = [&](std::size_t idx) -> bool {
    if (idx == seq.size()) return true;
    const int v = seq[idx];
    for (int c : cand[v]) {
      if (map2[c] >= 0) continue;
      bool ok = true;
      for (int w : g1.neighbors(v)) {
        if (map1[w] >= 0 && !g2.has_edge(c, map1[w])) {
          ok = false;
          break;
        }
      }
      if (ok) {
        for (int w2 : g2.neighbors(c)) {
          if (map2[w2] >= 0 && !g1.has_edge(v, map2[w2])) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      map1[v] = c;
      map2[c] = v;
      if (rec(idx + 1)) return true;
      map1[v] = -1;
      map2[c] = -1;
    }
    return false;
  };
  return rec(0);
}

// Center-respecting isomorphism for rooted blocks.
inline bool blocks_equivalent(const BuildingBlock& a, const BuildingBlock& b) {
  if (a.hop != b.hop) return false;
  return feature_isomorphic(a.graph, b.graph, {{a.center, b.center}});
}

}  // namespace grain
