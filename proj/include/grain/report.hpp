#pragma once

// Report assembly: attack output envelopes, evaluation reports, and batch
// summaries with bootstrapped confidence intervals. Reports are canonical:
// identical inputs and seeds serialize to identical bytes. Wall-clock timings
// are opt-in extras because they break that guarantee.

#include <grain/attack.hpp>
#include <grain/gsm.hpp>
#include <grain/io.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace grain {

constexpr int kBootstrapResamples = 10000;
constexpr std::uint64_t kBootstrapDefaultSeed = 17;

struct BootstrapCi {
  double mean = 0.0;
  double lo = 0.0;   // 2.5th percentile of resampled means
  double hi = 0.0;   // 97.5th percentile
};

namespace detail {

// Linear-interpolation percentile of a sorted sample.
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

// Percentile bootstrap over means of resampled values. Seeded, deterministic.
inline BootstrapCi bootstrap_ci(const std::vector<double>& values,
                                int resamples = kBootstrapResamples,
                                std::uint64_t seed = kBootstrapDefaultSeed) {
  if (values.empty())
    throw Error(ErrorCode::invalid_argument, "bootstrap_ci: empty sample");
  BootstrapCi ci;
  for (double v : values) ci.mean += v;
  ci.mean /= static_cast<double>(values.size());
  if (values.size() == 1) {
    ci.lo = ci.hi = values[0];
    return ci;
  }
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum += values[rng.below(values.size())];
    }
    means.push_back(sum / static_cast<double>(values.size()));
  }
  std::sort(means.begin(), means.end());
  ci.lo = detail::percentile_sorted(means, 0.025);
  ci.hi = detail::percentile_sorted(means, 0.975);
  return ci;
}

inline Json ci_to_json(const BootstrapCi& ci) {
  return Json{{"mean", ci.mean}, {"ci_low", ci.lo}, {"ci_high", ci.hi}};
}

// ---------------------------------------------------------------------------
// attack output envelope

inline Json level_stats_to_json(const std::vector<LevelStats>& levels) {
  Json arr = Json::array();
  for (const auto& l : levels) {
    arr.push_back(
        {{"level", l.level}, {"generated", l.generated}, {"kept", l.kept}});
  }
  return arr;
}

inline Json counters_to_json(const PipelineCounters& c) {
  return Json{{"span_checks", c.span_checks},
              {"glue_calls", c.glue_calls},
              {"delta_evals", c.delta_evals}};
}

inline Json search_stats_to_json(const SearchStats& s) {
  return Json{{"expanded", s.expanded},
              {"delta_evals", s.delta_evals},
              {"memo_hits", s.memo_hits},
              {"node_cap_prunes", s.node_cap_prunes},
              {"timed_out", s.timed_out}};
}

// Reconstruction envelope: the graph (or null), its gradient distance, and
// deterministic work counters. `wall_time_sec`, when provided, is appended
// under stats and makes the file run-dependent.
inline Json attack_to_json(const AttackResult& result,
                           std::optional<double> wall_time_sec = std::nullopt) {
  Json j;
  j["graph"] = result.graph ? graph_to_json(*result.graph) : Json(nullptr);
  const bool finite = std::isfinite(result.delta.delta);
  j["delta"] = finite ? Json(result.delta.delta) : Json(nullptr);
  j["relative_delta"] =
      std::isfinite(result.delta.relative) ? Json(result.delta.relative) : Json(nullptr);
  j["exact"] = result.exact;
  j["complete"] = result.complete;
  j["label_argmin"] =
      result.delta.label_argmin >= 0 ? Json(result.delta.label_argmin) : Json(nullptr);
  Json stats;
  stats["early_exact"] = result.early_exact;
  stats["degraded"] = result.degraded;
  stats["levels"] = level_stats_to_json(result.levels);
  stats["structure_kept"] = result.structure_kept;
  stats["counters"] = counters_to_json(result.counters);
  stats["search"] = search_stats_to_json(result.search);
  if (wall_time_sec) stats["wall_time_sec"] = *wall_time_sec;
  j["stats"] = std::move(stats);
  return j;
}

// Accepts either a bare graph file or a reconstruction envelope; a null graph
// yields nullopt.
inline std::optional<Graph> graph_from_reconstruction_json(const Json& j) {
  if (j.contains("graph")) {
    if (j.at("graph").is_null()) return std::nullopt;
    return graph_from_json(j.at("graph"), /*require_declared_degrees=*/false);
  }
  return graph_from_json(j, /*require_declared_degrees=*/false);
}

// ---------------------------------------------------------------------------
// evaluation report

struct EvalReport {
  double gsm0 = 0.0;
  double gsm1 = 0.0;
  double gsm2 = 0.0;
  bool full = false;
  int truth_size = 0;
  int recon_size = 0;
  std::vector<std::pair<int, int>> matching;
};

inline EvalReport evaluate_pair(const Graph& truth, const Graph& recon,
                                std::uint64_t seed = kGsmDefaultSeed) {
  EvalReport r;
  r.gsm0 = gsm(truth, recon, 0, seed);
  r.gsm1 = gsm(truth, recon, 1, seed);
  r.gsm2 = gsm(truth, recon, 2, seed);
  r.full = full_match(truth, recon);
  r.truth_size = truth.n();
  r.recon_size = recon.n();
  r.matching = match_nodes(truth, recon, seed).pairs;
  return r;
}

inline Json eval_report_to_json(const EvalReport& r) {
  Json matching = Json::array();
  for (const auto& [i, j] : r.matching) matching.push_back({i, j});
  return Json{{"gsm0", r.gsm0},
              {"gsm1", r.gsm1},
              {"gsm2", r.gsm2},
              {"full", r.full},
              {"sizes", {{"truth", r.truth_size}, {"reconstruction", r.recon_size}}},
              {"matching", std::move(matching)}};
}

// ---------------------------------------------------------------------------
// batch report

struct BatchGraphOutcome {
  std::string id;
  bool ok = false;
  std::string error;  // set when !ok
  Json attack;        // reconstruction envelope (when ok)
  std::optional<EvalReport> eval;
};

struct BatchSummary {
  std::size_t count = 0;
  std::size_t errors = 0;
  std::size_t exact = 0;
  std::size_t complete = 0;
  std::size_t full = 0;
  std::optional<BootstrapCi> gsm0, gsm1, gsm2;
};

inline BatchSummary summarize_batch(const std::vector<BatchGraphOutcome>& outcomes,
                                    std::uint64_t bootstrap_seed = kBootstrapDefaultSeed) {
  BatchSummary s;
  s.count = outcomes.size();
  std::vector<double> g0, g1, g2;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++s.errors;
      continue;
    }
    if (o.attack.contains("exact") && o.attack.at("exact").get<bool>()) ++s.exact;
    if (o.attack.contains("complete") && o.attack.at("complete").get<bool>())
      ++s.complete;
    if (o.eval) {
      if (o.eval->full) ++s.full;
      g0.push_back(o.eval->gsm0);
      g1.push_back(o.eval->gsm1);
      g2.push_back(o.eval->gsm2);
    }
  }
  if (!g0.empty()) {
    s.gsm0 = bootstrap_ci(g0, kBootstrapResamples, bootstrap_seed);
    s.gsm1 = bootstrap_ci(g1, kBootstrapResamples, bootstrap_seed);
    s.gsm2 = bootstrap_ci(g2, kBootstrapResamples, bootstrap_seed);
  }
  return s;
}

inline Json batch_summary_to_json(const BatchSummary& s) {
  Json j{{"count", s.count},
         {"errors", s.errors},
         {"exact", s.exact},
         {"complete", s.complete},
         {"full", s.full}};
  if (s.gsm0) {
    j["gsm0"] = ci_to_json(*s.gsm0);
    j["gsm1"] = ci_to_json(*s.gsm1);
    j["gsm2"] = ci_to_json(*s.gsm2);
  }
  return j;
}

inline Json batch_report_to_json(const Json& options, const Json& model_config,
                                 const std::vector<BatchGraphOutcome>& outcomes,
                                 std::uint64_t bootstrap_seed = kBootstrapDefaultSeed) {
  Json graphs = Json::array();
  for (const auto& o : outcomes) {
    Json entry{{"id", o.id}, {"status", o.ok ? "ok" : "error"}};
    if (!o.ok) {
      entry["error"] = o.error;
    } else {
      entry["attack"] = o.attack;
      if (o.eval) entry["evaluation"] = eval_report_to_json(*o.eval);
    }
    graphs.push_back(std::move(entry));
  }
  return Json{{"options", options},
              {"model", model_config},
              {"graphs", std::move(graphs)},
              {"summary", batch_summary_to_json(summarize_batch(outcomes, bootstrap_seed))}};
}

}  // namespace grain
