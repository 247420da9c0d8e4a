#pragma once

// Gluing a building block onto a host graph at a chosen site, and overlapping
// (merging) feature-equal nodes afterwards. Gluing enumerates every injective
// matching of the site's l-hop neighborhood into the block that preserves
// features and adjacency, then substitutes the block in: matched host nodes
// keep their indices, unmatched block nodes are appended, and edges incident
// to the matched region are re-homed through the matching.

#include <grain/graph.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace grain {

struct GlueResult {
  Graph graph;
  // Indices (in `graph`) of nodes appended from the block.
  std::vector<int> new_nodes;
};

namespace detail {

// Dedup rule for glue outputs: two results are the same attachment when they
// are feature-isomorphic via a map fixing the glue site, i.e. they differ
// only by relabeling of the appended nodes.
inline void dedup_glue_results(std::vector<GlueResult>& results, int site) {
  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  std::vector<GlueResult> kept;
  for (auto& r : results) {
    const std::string key = iso_invariant_key(r.graph);
    bool dup = false;
    for (std::size_t j : buckets[key]) {
      if (feature_isomorphic(kept[j].graph, r.graph, {{site, site}})) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      buckets[key].push_back(kept.size());
      kept.push_back(std::move(r));
    }
  }
  results = std::move(kept);
}

}  // namespace detail

// All graphs obtainable by gluing block `b` (of radius l) onto `g` at node
// `c`. Empty when the site's features differ from the block center's or no
// consistent matching exists. Results never violate declared degrees.
inline std::vector<GlueResult> glue(const Graph& g, const BuildingBlock& b,
                                    int c, int l) {
  if (c < 0 || c >= g.n())
    throw Error(ErrorCode::invalid_argument, "glue: site out of range");
  if (b.hop != l)
    throw Error(ErrorCode::invalid_argument, "glue: block radius does not match l");
  if (!(*g.schema() == *b.graph.schema()))
    throw Error(ErrorCode::invalid_argument, "glue: schema mismatch");

  std::vector<GlueResult> results;
  if (!(g.node(c) == b.graph.node(b.center))) return results;

  // Host nodes within distance l of the site, ordered ring by ring. Every one
  // of them must be matched into the block.
  const auto dist = bfs_distances(g, c);
  std::vector<int> region;
  for (int i = 0; i < g.n(); ++i) {
    if (i != c && dist[i] >= 0 && dist[i] <= l) region.push_back(i);
  }
  std::stable_sort(region.begin(), region.end(),
                   [&](int a, int bb) { return dist[a] < dist[bb]; });

  const int nb = b.graph.n();
  std::vector<int> host_to_block(g.n(), -1);
  std::vector<int> block_used(nb, 0);
  host_to_block[c] = b.center;
  block_used[b.center] = 1;

  std::vector<std::vector<int>> matchings;
  std::function<void(std::size_t)> rec = [&](std::size_t idx) {
    if (idx == region.size()) {
      std::vector<int> m(region.size());
      for (std::size_t i = 0; i < region.size(); ++i)
        m[i] = host_to_block[region[i]];
      matchings.push_back(std::move(m));
      return;
    }
    const int v = region[idx];
    for (int vb = 0; vb < nb; ++vb) {
      if (block_used[vb]) continue;
      if (!(g.node(v) == b.graph.node(vb))) continue;
      bool ok = true;
      for (int w : g.neighbors(v)) {
        const int wb = host_to_block[w];
        if (wb >= 0 && !b.graph.has_edge(vb, wb)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      host_to_block[v] = vb;
      block_used[vb] = 1;
      rec(idx + 1);
      host_to_block[v] = -1;
      block_used[vb] = 0;
    }
  };
  rec(0);

  for (const auto& m : matchings) {
    std::vector<int> h2b(g.n(), -1);
    std::vector<int> b2h(nb, -1);
    h2b[c] = b.center;
    b2h[b.center] = c;
    for (std::size_t i = 0; i < region.size(); ++i) {
      h2b[region[i]] = m[i];
      b2h[m[i]] = region[i];
    }
    std::vector<NodeFeatures> nodes = g.nodes();
    std::vector<int> new_nodes;
    std::vector<int> block_to_result(nb, -1);
    for (int vb = 0; vb < nb; ++vb) {
      if (b2h[vb] >= 0) {
        block_to_result[vb] = b2h[vb];
      } else {
        block_to_result[vb] = static_cast<int>(nodes.size());
        new_nodes.push_back(block_to_result[vb]);
        nodes.push_back(b.graph.node(vb));
      }
    }
    std::vector<Edge> edges = g.edges();
    for (const auto& e : b.graph.edges()) {
      edges.push_back(
          normalized_edge(block_to_result[e.first], block_to_result[e.second]));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    // Degree check up front: over-saturated matchings are skipped, never
    // surfaced as construction errors.
    std::vector<int> degree(nodes.size(), 0);
    for (const auto& e : edges) {
      ++degree[e.first];
      ++degree[e.second];
    }
    const int dfi = g.schema()->degree_feature_index;
    bool degree_ok = true;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (degree[i] > nodes[i][dfi]) {
        degree_ok = false;
        break;
      }
    }
    if (!degree_ok) continue;
    Graph result(g.schema(), std::move(nodes), std::move(edges));
    results.push_back(GlueResult{std::move(result), std::move(new_nodes)});
  }

  detail::dedup_glue_results(results, c);
  return results;
}

// Merges each (keep, remove) pair into one node: `remove` is deleted and its
// edges re-homed onto `keep` (would-be self-loops and duplicate edges are
// dropped). Returns nothing if any pair's features differ or a merged node
// would exceed its declared degree.
inline std::optional<Graph> overlap(const Graph& g,
                                    const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> partner(g.n(), -1);
  std::vector<char> removed(g.n(), 0), kept(g.n(), 0);
  for (const auto& [keep, rem] : pairs) {
    if (keep < 0 || keep >= g.n() || rem < 0 || rem >= g.n() || keep == rem)
      throw Error(ErrorCode::invalid_argument, "overlap: bad node pair");
    if (removed[rem] || kept[rem] || removed[keep])
      throw Error(ErrorCode::invalid_argument, "overlap: pairs not injective");
    removed[rem] = 1;
    kept[keep] = 1;
    partner[rem] = keep;
  }
  for (const auto& [keep, rem] : pairs) {
    if (!(g.node(keep) == g.node(rem))) return std::nullopt;
  }

  std::vector<int> remap(g.n(), -1);
  std::vector<NodeFeatures> nodes;
  for (int i = 0; i < g.n(); ++i) {
    if (removed[i]) continue;
    remap[i] = static_cast<int>(nodes.size());
    nodes.push_back(g.node(i));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    int a = removed[e.first] ? partner[e.first] : e.first;
    int b = removed[e.second] ? partner[e.second] : e.second;
    if (a == b) continue;
    edges.push_back(normalized_edge(remap[a], remap[b]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<int> degree(nodes.size(), 0);
  for (const auto& e : edges) {
    ++degree[e.first];
    ++degree[e.second];
  }
  const int dfi = g.schema()->degree_feature_index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (degree[i] > nodes[i][dfi]) return std::nullopt;
  }
  return Graph(g.schema(), std::move(nodes), std::move(edges));
}

}  // namespace grain
