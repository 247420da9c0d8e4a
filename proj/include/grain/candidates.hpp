#pragma once

// Candidate generation and filtering: from the level-0 feature filter through
// l-hop block growth to the structure filter that precedes the search. At
// level l a candidate survives when the center's layer-l input embedding,
// propagated on the block alone, lies inside the column span of the matching
// weight gradient (the first readout matrix at the final level).

#include <grain/delta.hpp>
#include <grain/glue.hpp>
#include <grain/gnn.hpp>
#include <grain/graph.hpp>
#include <grain/log.hpp>
#include <grain/span.hpp>

#include <algorithm>
#include <functional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace grain {

constexpr double kDefaultTau = 1e-3;

struct ScoredBlock {
  BuildingBlock block;
  Vector embedding;      // center embedding at the block's level
  double span_dist = 0.0;
  std::string key;       // exact serialization, for deterministic ordering
};

struct CandidateSet {
  int level = 0;
  std::vector<ScoredBlock> blocks;
};

struct FilterLimits {
  std::size_t max_candidates = 200000;
};

// Deterministic work counters (kept instead of wall-clock in reports).
struct PipelineCounters {
  std::uint64_t span_checks = 0;
  std::uint64_t glue_calls = 0;
  std::uint64_t delta_evals = 0;
};

struct LevelStats {
  int level = 0;
  std::size_t generated = 0;
  std::size_t kept = 0;
};

namespace detail {

inline void check_cap(std::size_t count, const FilterLimits& limits, int level) {
  if (count > limits.max_candidates)
    throw Error(ErrorCode::cap_exceeded,
                "candidate cap exceeded at level " + std::to_string(level) + ": " +
                    std::to_string(count) + " > " +
                    std::to_string(limits.max_candidates));
}

// Span basis for a level: GNN layer gradient below the top, first readout
// matrix gradient at the top.
inline SpanBasis level_basis(const GradientBundle& bundle, int layer) {
  if (layer < 1 || layer > bundle.config.num_gnn_layers)
    throw Error(ErrorCode::invalid_argument, "filter: bad layer index");
  if (layer == bundle.config.num_gnn_layers)
    return build_span_basis(bundle.grads.readout1);
  return build_span_basis(bundle.grads.gnn[layer]);
}

// Dedup of rooted blocks by center-respecting feature isomorphism, keeping
// first occurrences in order.
inline std::vector<BuildingBlock> dedup_blocks(std::vector<BuildingBlock> blocks) {
  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  std::vector<BuildingBlock> kept;
  for (auto& b : blocks) {
    const std::string key = block_invariant_key(b);
    bool dup = false;
    for (std::size_t j : buckets[key]) {
      if (blocks_equivalent(kept[j], b)) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      buckets[key].push_back(kept.size());
      kept.push_back(std::move(b));
    }
  }
  return kept;
}

}  // namespace detail

// Level-0 filter: walks the feature space one feature at a time, pruning
// partial one-hot prefixes against the matching row-prefix of the first
// layer's weight gradient. Pruning starts only once the prefix width exceeds
// the gradient's rank; below that the truncated span can contain every
// prefix, so checks carry no signal.
inline CandidateSet filter_nodes(const SchemaPtr& schema, const GradientBundle& bundle,
                                 double tau, const FilterLimits& limits = {},
                                 PipelineCounters* counters = nullptr) {
  schema->validate();
  bundle.validate();
  if (schema->one_hot_width() != bundle.config.input_dim)
    throw Error(ErrorCode::shape_mismatch,
                "schema width does not match bundle input_dim");
  const Matrix& grad0 = bundle.grads.gnn[0];
  const int rank = numeric_rank(grad0);

  std::vector<NodeFeatures> prefixes{{}};
  std::vector<double> last_dist{0.0};
  int d_sum = 0;
  for (int k = 0; k < schema->num_features(); ++k) {
    const int card = schema->features[k].cardinality;
    std::vector<NodeFeatures> next;
    next.reserve(prefixes.size() * card);
    for (const auto& p : prefixes) {
      for (int c = 0; c < card; ++c) {
        NodeFeatures q = p;
        q.push_back(c);
        next.push_back(std::move(q));
      }
    }
    d_sum += card;
    detail::check_cap(next.size(), limits, 0);
    if (d_sum > rank) {
      SpanBasis basis = build_span_basis(grad0, d_sum);
      std::vector<NodeFeatures> kept;
      std::vector<double> kept_dist;
      for (auto& p : next) {
        Vector z = Vector::Zero(d_sum);
        int off = 0;
        for (int f = 0; f <= k; ++f) {
          z[off + p[f]] = 1.0;
          off += schema->features[f].cardinality;
        }
        const double d = span_distance(z, basis);
        if (counters) ++counters->span_checks;
        if (d < tau) {
          kept.push_back(std::move(p));
          kept_dist.push_back(d);
        }
      }
      prefixes = std::move(kept);
      last_dist = std::move(kept_dist);
    } else {
      prefixes = std::move(next);
      last_dist.assign(prefixes.size(), 0.0);
    }
    if (prefixes.empty()) break;
  }

  CandidateSet out;
  out.level = 0;
  out.blocks.reserve(prefixes.size());
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    BuildingBlock b{Graph(schema, {prefixes[i]}, {}), 0, 0};
    std::string key = exact_key(b);
    out.blocks.push_back(ScoredBlock{std::move(b), schema->one_hot(prefixes[i]),
                                     last_dist[i], std::move(key)});
  }
  return out;
}

// Keeps blocks whose center embedding at `layer` sits within tau of the
// corresponding gradient span. Embeddings and distances are cached on the
// survivors.
inline CandidateSet filter(const CandidateSet& candidates, const GradientBundle& bundle,
                           double tau, int layer,
                           PipelineCounters* counters = nullptr) {
  SpanBasis basis = detail::level_basis(bundle, layer);
  CandidateSet out;
  out.level = candidates.level;
  for (const auto& sb : candidates.blocks) {
    Vector emb = propagate_block(sb.block, bundle.weights, bundle.config, layer);
    const double d = span_distance(emb, basis);
    if (counters) ++counters->span_checks;
    if (d < tau) {
      out.blocks.push_back(ScoredBlock{
          sb.block, std::move(emb), d,
          sb.key.empty() ? exact_key(sb.block) : sb.key});
    }
  }
  return out;
}

struct GenerateOptions {
  double tau = kDefaultTau;
  bool unique_features = false;  // heuristic: node features pairwise distinct
  FilterLimits limits;
};

struct GenerateResult {
  CandidateSet set;  // the final level's survivors
  std::vector<LevelStats> levels;
  PipelineCounters counters;
  // True when some level's filter emptied a non-empty generation and the
  // previous level's survivors were returned instead.
  bool degraded = false;
};

namespace detail {

// Wraps blocks into a candidate set with exact keys (embeddings filled by the
// next filter pass).
inline CandidateSet to_candidate_set(std::vector<BuildingBlock> blocks, int level) {
  CandidateSet set;
  set.level = level;
  set.blocks.reserve(blocks.size());
  for (auto& b : blocks) {
    std::string key = exact_key(b);
    set.blocks.push_back(ScoredBlock{std::move(b), Vector(), 0.0, std::move(key)});
  }
  return set;
}

}  // namespace detail

// Grows candidate blocks level by level: 1-hop stars around every surviving
// node (attaching exactly declared-degree many neighbors, none of declared
// degree zero), then gluing surviving 1-hop blocks onto every dangling node
// of each block, filtering after each level. Blocks with no dangling nodes
// ride through unchanged (their radius metadata is bumped, which is sound:
// a complete graph is an l-hop block for every l).
inline GenerateResult generate_bbs(const CandidateSet& t0, const GradientBundle& bundle,
                                   const GenerateOptions& options = {}) {
  if (t0.level != 0)
    throw Error(ErrorCode::invalid_argument, "generate_bbs expects a level-0 set");
  const ModelConfig& cfg = bundle.config;
  const int L = cfg.num_gnn_layers;
  GenerateResult result;
  result.levels.push_back(LevelStats{0, t0.blocks.size(), t0.blocks.size()});

  // Attachment pool: surviving nodes that can be someone's neighbor.
  std::vector<const ScoredBlock*> pool;
  for (const auto& sb : t0.blocks) {
    if (sb.block.graph.declared_degree(0) >= 1) pool.push_back(&sb);
  }

  std::vector<BuildingBlock> t1;
  for (const auto& sb : t0.blocks) {
    const NodeFeatures& center = sb.block.graph.node(0);
    const int deg = sb.block.graph.declared_degree(0);
    if (deg == 0) {
      t1.push_back(BuildingBlock{sb.block.graph, 0, 1});
      continue;
    }
    std::vector<const ScoredBlock*> eligible;
    for (const ScoredBlock* p : pool) {
      if (options.unique_features && p->block.graph.node(0) == center) continue;
      eligible.push_back(p);
    }
    // Multisets of `deg` attachments; all-distinct sets under the uniqueness
    // heuristic, since no two nodes may share features there.
    std::vector<int> pick;
    std::function<void(std::size_t)> enumerate = [&](std::size_t start) {
      if (static_cast<int>(pick.size()) == deg) {
        std::vector<NodeFeatures> nodes{center};
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < pick.size(); ++i) {
          nodes.push_back(eligible[pick[i]]->block.graph.node(0));
          edges.push_back({0, static_cast<int>(i) + 1});
        }
        t1.push_back(BuildingBlock{
            Graph(sb.block.graph.schema(), std::move(nodes), std::move(edges)), 0, 1});
        detail::check_cap(t1.size(), options.limits, 1);
        return;
      }
      for (std::size_t i = start; i < eligible.size(); ++i) {
        pick.push_back(static_cast<int>(i));
        enumerate(options.unique_features ? i + 1 : i);
        pick.pop_back();
      }
    };
    enumerate(0);
  }

  const std::size_t t1_generated = t1.size();
  CandidateSet stars =
      filter(detail::to_candidate_set(std::move(t1), 1), bundle, options.tau, 1,
             &result.counters);
  result.levels.push_back(LevelStats{1, t1_generated, stars.blocks.size()});
  log_info("generate_bbs level 1: " + std::to_string(t1_generated) + " -> " +
           std::to_string(stars.blocks.size()));
  if (stars.blocks.empty()) {
    // Nothing survives the 1-hop filter; hand back the level-0 survivors so
    // the caller can still report the best available evidence.
    log_warn("generate_bbs: no 1-hop blocks survived, falling back to level 0");
    result.set = t0;
    result.degraded = true;
    return result;
  }

  CandidateSet current = stars;
  for (int l = 1; l < L; ++l) {
    std::vector<BuildingBlock> grown;
    for (const auto& sb : current.blocks) {
      std::vector<Graph> states{sb.block.graph};
      const int center = sb.block.center;
      for (int v : dangling_nodes(sb.block.graph)) {
        std::vector<Graph> next;
        for (const auto& state : states) {
          for (const auto& partner : stars.blocks) {
            ++result.counters.glue_calls;
            for (auto& res : glue(state, partner.block, v, 1)) {
              next.push_back(std::move(res.graph));
              detail::check_cap(grown.size() + next.size(), options.limits, l + 1);
            }
          }
        }
        states = std::move(next);
        if (states.empty()) break;
      }
      for (auto& state : states) {
        grown.push_back(BuildingBlock{std::move(state), center, l + 1});
      }
    }
    grown = detail::dedup_blocks(std::move(grown));
    const std::size_t generated = grown.size();
    CandidateSet next = filter(detail::to_candidate_set(std::move(grown), l + 1),
                               bundle, options.tau, l + 1, &result.counters);
    result.levels.push_back(LevelStats{l + 1, generated, next.blocks.size()});
    log_info("generate_bbs level " + std::to_string(l + 1) + ": " +
             std::to_string(generated) + " -> " + std::to_string(next.blocks.size()));
    if (next.blocks.empty()) {
      log_warn("generate_bbs: no blocks survived level " + std::to_string(l + 1) +
               ", keeping level " + std::to_string(current.level));
      result.set = std::move(current);
      result.degraded = true;
      return result;
    }
    current = std::move(next);
  }

  result.set = std::move(current);
  return result;
}

// Structure filter outcome: either a gradient-exact candidate found early, or
// the pruned candidate set.
struct EarlyExact {
  Graph graph;
  DeltaResult delta;
};

using StructureFilterResult = std::variant<EarlyExact, CandidateSet>;

// Drops blocks that cannot be completed: every dangling node must admit at
// least one gluable partner from the set itself. A gradient-exact block short
// circuits the whole pipeline.
inline StructureFilterResult structure_filter(const CandidateSet& tb,
                                              const GradientBundle& bundle,
                                              PipelineCounters* counters = nullptr) {
  for (const auto& sb : tb.blocks) {
    DeltaResult d = gradient_distance(sb.block.graph, bundle);
    if (counters) ++counters->delta_evals;
    if (d.exact()) return EarlyExact{sb.block.graph, d};
  }
  CandidateSet out;
  out.level = tb.level;
  for (const auto& sb : tb.blocks) {
    bool ok = true;
    for (int v : dangling_nodes(sb.block.graph)) {
      bool gluable = false;
      for (const auto& partner : tb.blocks) {
        if (!(partner.block.graph.node(partner.block.center) == sb.block.graph.node(v)))
          continue;
        if (counters) ++counters->glue_calls;
        // A degraded set may carry blocks of radius < L; glue at the
        // partner's own radius, exactly as the search itself will.
        if (!glue(sb.block.graph, partner.block, v, partner.block.hop).empty()) {
          gluable = true;
          break;
        }
      }
      if (!gluable) {
        ok = false;
        break;
      }
    }
    if (ok) out.blocks.push_back(sb);
  }
  return out;
}

}  // namespace grain
