#pragma once

// End-to-end reconstruction pipeline: node-feature filtering, block growth,
// structure filtering, then depth-first assembly, driven by a single gradient
// bundle. Deterministic for a fixed bundle and options.

#include <grain/candidates.hpp>
#include <grain/log.hpp>
#include <grain/reconstruct.hpp>

#include <optional>
#include <variant>
#include <vector>

namespace grain {

struct AttackOptions {
  double tau = kDefaultTau;
  double timeout_sec = 900.0;
  bool unique_features = false;  // assume pairwise-distinct node features
  bool gnn_only_delta = false;   // score candidates on GNN-layer gradients only
  FilterLimits limits;
  std::size_t memo_capacity = 1000000;
  int max_nodes = 0;  // 0: use the model's hidden dimension
};

struct AttackResult {
  std::optional<Graph> graph;
  DeltaResult delta;
  bool complete = false;
  bool exact = false;
  bool early_exact = false;  // a candidate block already matched the gradient

  // Diagnostics, all deterministic.
  std::vector<LevelStats> levels;
  std::size_t structure_kept = 0;
  bool degraded = false;  // some stage emptied out and a fallback set was used
  PipelineCounters counters;
  SearchStats search;
};

// Runs the full pipeline. A structure-filter hit on a gradient-exact block
// returns immediately; otherwise the search result (possibly a dead-end
// partial graph) is reported as-is.
inline AttackResult run_attack(const SchemaPtr& schema, const GradientBundle& bundle,
                               const AttackOptions& options = {}) {
  bundle.validate();
  AttackResult result;

  CandidateSet t0 = filter_nodes(schema, bundle, options.tau, options.limits,
                                 &result.counters);
  log_info("filter_nodes: " + std::to_string(t0.blocks.size()) + " survivors");
  if (t0.blocks.empty()) {
    result.delta.delta = std::numeric_limits<double>::infinity();
    result.delta.relative = std::numeric_limits<double>::infinity();
    result.levels.push_back(LevelStats{0, 0, 0});
    return result;
  }

  GenerateOptions gen_options;
  gen_options.tau = options.tau;
  gen_options.unique_features = options.unique_features;
  gen_options.limits = options.limits;
  GenerateResult gen = generate_bbs(t0, bundle, gen_options);
  result.levels = gen.levels;
  result.counters.span_checks += gen.counters.span_checks;
  result.counters.glue_calls += gen.counters.glue_calls;
  result.counters.delta_evals += gen.counters.delta_evals;
  result.degraded = gen.degraded;

  StructureFilterResult sf = structure_filter(gen.set, bundle, &result.counters);
  if (auto* hit = std::get_if<EarlyExact>(&sf)) {
    result.graph = hit->graph;
    result.delta = hit->delta;
    result.complete = dangling_nodes(hit->graph).empty();
    result.exact = true;
    result.early_exact = true;
    result.structure_kept = gen.set.blocks.size();
    return result;
  }
  CandidateSet tb = std::get<CandidateSet>(std::move(sf));
  result.structure_kept = tb.blocks.size();
  log_info("structure_filter: " + std::to_string(gen.set.blocks.size()) + " -> " +
           std::to_string(tb.blocks.size()));
  if (tb.blocks.empty() && !gen.set.blocks.empty()) {
    // The completability test removed everything (possible when the client
    // graph violates the filters' premises). Search the unfiltered set.
    log_warn("structure_filter emptied the candidate set, searching unfiltered");
    tb = std::move(gen.set);
    result.degraded = true;
  }

  SearchOptions search_options;
  search_options.timeout_sec = options.timeout_sec;
  search_options.unique_features = options.unique_features;
  search_options.gnn_only_delta = options.gnn_only_delta;
  search_options.memo_capacity = options.memo_capacity;
  search_options.max_nodes = options.max_nodes;
  SearchResult search = do_dfs(tb, bundle, search_options, &result.counters);
  result.graph = std::move(search.graph);
  result.delta = search.delta;
  result.complete = search.complete;
  result.exact = search.exact;
  result.search = search.stats;
  return result;
}

}  // namespace grain
