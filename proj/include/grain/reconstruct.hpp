#pragma once

// Assembly of full candidate graphs from filtered building blocks: blocks are
// ordered by how cheaply their dangling nodes can be completed, then a
// depth-first search repeatedly glues blocks onto the worst dangling node,
// enumerating cycle-closing overlaps, until the gradient distance hits zero
// or the search budget runs out.

#include <grain/candidates.hpp>
#include <grain/delta.hpp>
#include <grain/glue.hpp>

#include <chrono>
#include <functional>
#include <limits>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace grain {

// Sum over dangling vertices of the best (lowest) span distance among blocks
// gluable there; +inf as soon as some dangling vertex has no gluable partner.
// Blocks with no dangling vertices score 0 and sort first. Ties break on the
// block's serialized key.
inline std::vector<ScoredBlock> order_blocks(const CandidateSet& tb,
                                             PipelineCounters* counters = nullptr) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> score(tb.blocks.size(), 0.0);
  for (std::size_t i = 0; i < tb.blocks.size(); ++i) {
    const auto& sb = tb.blocks[i];
    double total = 0.0;
    for (int v : dangling_nodes(sb.block.graph)) {
      double best = inf;
      for (const auto& partner : tb.blocks) {
        if (!(partner.block.graph.node(partner.block.center) ==
              sb.block.graph.node(v)))
          continue;
        if (partner.span_dist >= best) continue;
        if (counters) ++counters->glue_calls;
        if (!glue(sb.block.graph, partner.block, v, partner.block.hop).empty())
          best = partner.span_dist;
      }
      total += best;
      if (total == inf) break;
    }
    score[i] = total;
  }
  std::vector<std::size_t> idx(tb.blocks.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    return tb.blocks[a].key < tb.blocks[b].key;
  });
  std::vector<ScoredBlock> ordered;
  ordered.reserve(idx.size());
  for (std::size_t i : idx) ordered.push_back(tb.blocks[i]);
  return ordered;
}

// Dangling node with the largest degree deficit, lowest index on ties; -1
// when the graph is complete.
inline int select_dangling(const Graph& g) {
  int best = -1, best_deficit = 0;
  for (int i = 0; i < g.n(); ++i) {
    const int deficit = g.declared_degree(i) - g.structural_degree(i);
    if (deficit > best_deficit) {
      best_deficit = deficit;
      best = i;
    }
  }
  return best;
}

struct BranchOptions {
  bool unique_features = false;
};

namespace detail {

// Children from gluing one block: the plain gluings plus every valid overlap
// of feature-equal (existing, new) pairs. Under the uniqueness heuristic only
// the maximal overlap is emitted (two nodes with equal features must be the
// same node).
inline void branch_one_block(const Graph& g, const ScoredBlock& block, int v,
                             const BranchOptions& options,
                             PipelineCounters* counters, std::vector<Graph>& out) {
  if (counters) ++counters->glue_calls;
  for (auto& res : glue(g, block.block, v, block.block.hop)) {
    if (res.new_nodes.empty()) {
      out.push_back(std::move(res.graph));
      continue;
    }
    if (options.unique_features) {
      std::vector<std::pair<int, int>> s;
      std::unordered_set<int> taken;
      for (int nn : res.new_nodes) {
        for (int e = 0; e < g.n(); ++e) {
          if (taken.count(e)) continue;
          if (res.graph.node(e) == res.graph.node(nn)) {
            s.push_back({e, nn});
            taken.insert(e);
            break;
          }
        }
      }
      if (s.empty()) {
        out.push_back(std::move(res.graph));
      } else if (auto merged = overlap(res.graph, s)) {
        out.push_back(std::move(*merged));
      }
      continue;
    }
    // Every injective set of feature-equal (existing, new) pairs, including
    // the empty one. Each new node independently merges into one compatible
    // existing node or stays.
    std::vector<std::vector<int>> choices(res.new_nodes.size());
    for (std::size_t i = 0; i < res.new_nodes.size(); ++i) {
      for (int e = 0; e < g.n(); ++e) {
        if (res.graph.node(e) == res.graph.node(res.new_nodes[i]))
          choices[i].push_back(e);
      }
    }
    std::vector<std::pair<int, int>> s;
    std::unordered_set<int> taken;
    std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
      if (i == res.new_nodes.size()) {
        if (s.empty()) {
          out.push_back(res.graph);
        } else if (auto merged = overlap(res.graph, s)) {
          out.push_back(std::move(*merged));
        }
        return;
      }
      enumerate(i + 1);  // new node i stays separate
      for (int e : choices[i]) {
        if (taken.count(e)) continue;
        taken.insert(e);
        s.push_back({e, res.new_nodes[i]});
        enumerate(i + 1);
        s.pop_back();
        taken.erase(e);
      }
    };
    enumerate(0);
  }
}

// Children annotated with the key of the block that produced them, for
// per-path bookkeeping. Duplicates (by feature isomorphism) keep their first
// producer.
inline std::vector<std::pair<Graph, std::string>> branch_attributed(
    const std::vector<ScoredBlock>& ordered_blocks, const Graph& g, int v,
    const BranchOptions& options, PipelineCounters* counters,
    const std::unordered_set<std::string>* used_keys) {
  std::vector<std::pair<Graph, std::string>> out;
  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  for (const auto& block : ordered_blocks) {
    if (!(block.block.graph.node(block.block.center) == g.node(v))) continue;
    if (used_keys != nullptr && used_keys->count(block.key)) continue;
    std::vector<Graph> children;
    branch_one_block(g, block, v, options, counters, children);
    for (auto& child : children) {
      const std::string key = iso_invariant_key(child);
      bool dup = false;
      for (std::size_t j : buckets[key]) {
        if (feature_isomorphic(out[j].first, child)) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        buckets[key].push_back(out.size());
        out.push_back({std::move(child), block.key});
      }
    }
  }
  return out;
}

}  // namespace detail

// All successor graphs of g obtained by gluing one candidate block (in the
// given order) at node v, each expanded with its overlap variants and
// deduplicated by feature isomorphism.
inline std::vector<Graph> branch(const std::vector<ScoredBlock>& ordered_blocks,
                                 const Graph& g, int v,
                                 const BranchOptions& options = {},
                                 PipelineCounters* counters = nullptr,
                                 const std::unordered_set<std::string>* used_keys = nullptr) {
  std::vector<Graph> out;
  for (auto& [child, key] :
       detail::branch_attributed(ordered_blocks, g, v, options, counters, used_keys)) {
    out.push_back(std::move(child));
  }
  return out;
}

struct SearchOptions {
  double timeout_sec = 900.0;
  bool unique_features = false;
  bool gnn_only_delta = false;
  std::size_t memo_capacity = 1000000;
  int max_nodes = 0;  // 0: use the model's hidden dimension
};

struct SearchStats {
  std::uint64_t expanded = 0;
  std::uint64_t delta_evals = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t node_cap_prunes = 0;
  bool timed_out = false;
};

struct SearchResult {
  std::optional<Graph> graph;
  DeltaResult delta;
  bool complete = false;  // best graph has no dangling nodes
  bool exact = false;
  SearchStats stats;
};

namespace detail {

// Bounded LRU set of serialized graph keys.
class LruSet {
 public:
  explicit LruSet(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  // Returns true if already present (refreshing it), else inserts.
  bool check_and_insert(const std::string& key) {
    auto it = map_.find(key);
    if (it != map_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return true;
    }
    order_.push_front(key);
    map_[key] = order_.begin();
    if (map_.size() > capacity_) {
      map_.erase(order_.back());
      order_.pop_back();
    }
    return false;
  }

 private:
  std::size_t capacity_;
  std::list<std::string> order_;
  std::unordered_map<std::string, std::list<std::string>::iterator> map_;
};

}  // namespace detail

// Depth-first reconstruction over the ordered block set. Returns the first
// gradient-exact complete graph if one is reached; otherwise the best
// complete graph by gradient distance (or the best dead-end partial graph if
// nothing completed), with the timeout flagged. Under the uniqueness
// heuristic each block is glued at most once along any root-to-leaf path.
inline SearchResult do_dfs(const CandidateSet& tb, const GradientBundle& bundle,
                           const SearchOptions& options = {},
                           PipelineCounters* counters = nullptr) {
  SearchResult result;
  if (tb.blocks.empty()) {
    result.delta.delta = std::numeric_limits<double>::infinity();
    result.delta.relative = std::numeric_limits<double>::infinity();
    return result;
  }
  const std::vector<ScoredBlock> ordered = order_blocks(tb, counters);
  const int max_nodes =
      options.max_nodes > 0 ? options.max_nodes : bundle.config.hidden_dim;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(options.timeout_sec));
  detail::LruSet memo(options.memo_capacity);
  const BranchOptions branch_options{options.unique_features};

  double best_complete = std::numeric_limits<double>::infinity();
  double best_partial = std::numeric_limits<double>::infinity();
  std::optional<Graph> best_complete_graph, best_partial_graph;
  DeltaResult best_complete_delta, best_partial_delta;
  bool stop = false;

  auto time_up = [&] { return std::chrono::steady_clock::now() >= deadline; };

  auto eval_complete = [&](const Graph& g) {
    DeltaResult d = gradient_distance(g, bundle, options.gnn_only_delta);
    ++result.stats.delta_evals;
    if (counters) ++counters->delta_evals;
    if (d.delta < best_complete) {
      best_complete = d.delta;
      best_complete_graph = g;
      best_complete_delta = d;
    }
    if (d.exact()) stop = true;
  };

  auto eval_partial = [&](const Graph& g) {
    if (best_complete_graph) return;  // partials only matter if nothing completes
    DeltaResult d = gradient_distance(g, bundle, options.gnn_only_delta);
    ++result.stats.delta_evals;
    if (counters) ++counters->delta_evals;
    if (d.delta < best_partial) {
      best_partial = d.delta;
      best_partial_graph = g;
      best_partial_delta = d;
    }
  };

  std::unordered_set<std::string> used_keys;
  std::function<void(const Graph&)> rec = [&](const Graph& g) {
    if (stop) return;
    if (time_up()) {
      result.stats.timed_out = true;
      eval_partial(g);
      return;
    }
    ++result.stats.expanded;
    const int v = select_dangling(g);
    if (v < 0) {
      eval_complete(g);
      return;
    }
    if (g.n() > max_nodes) {
      ++result.stats.node_cap_prunes;
      eval_partial(g);
      return;
    }
    if (memo.check_and_insert(exact_key(g))) {
      ++result.stats.memo_hits;
      return;
    }
    auto children = detail::branch_attributed(
        ordered, g, v, branch_options, counters,
        options.unique_features ? &used_keys : nullptr);
    if (children.empty()) {
      eval_partial(g);
      return;
    }
    for (const auto& [child, key] : children) {
      bool inserted = false;
      if (options.unique_features) inserted = used_keys.insert(key).second;
      rec(child);
      if (inserted) used_keys.erase(key);
      if (stop || result.stats.timed_out) return;
    }
  };

  for (const auto& root : ordered) {
    if (stop || time_up()) break;
    used_keys.clear();
    if (options.unique_features) used_keys.insert(root.key);
    rec(root.block.graph);
  }
  if (time_up()) result.stats.timed_out = true;

  if (best_complete_graph) {
    result.graph = std::move(best_complete_graph);
    result.delta = best_complete_delta;
    result.complete = true;
    result.exact = best_complete_delta.exact();
  } else if (best_partial_graph) {
    result.graph = std::move(best_partial_graph);
    result.delta = best_partial_delta;
    result.complete = false;
    result.exact = false;
  } else {
    result.delta.delta = std::numeric_limits<double>::infinity();
    result.delta.relative = std::numeric_limits<double>::infinity();
  }
  return result;
}

}  // namespace grain
