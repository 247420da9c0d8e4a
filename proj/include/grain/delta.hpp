#pragma once

// Gradient-matching distance: how far the gradients a candidate graph would
// have produced are from the observed ones, concatenated over weight
// matrices. Graph classification minimizes over the (unknown) label; node
// classification uses the known labels.

#include <grain/gnn.hpp>
#include <grain/model.hpp>

#include <cmath>
#include <vector>

namespace grain {

// Relative distance at or below which a candidate counts as an exact
// gradient match.
constexpr double kExactDeltaRelTol = 1e-9;

struct DeltaResult {
  double delta = 0.0;     // Frobenius norm of the gradient difference
  double relative = 0.0;  // delta / ||observed||_F
  int label_argmin = -1;  // minimizing label (graph task; -1 for node task)

  bool exact() const { return relative <= kExactDeltaRelTol; }
};

inline DeltaResult gradient_distance(const Graph& g, const GradientBundle& bundle,
                                     bool gnn_only = false) {
  const ModelConfig& cfg = bundle.config;
  DeltaResult out;
  const double obs_norm = std::sqrt(weights_sq_norm(bundle.grads, gnn_only));
  if (cfg.task == Task::graph_classification) {
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (int c = 0; c < cfg.num_classes; ++c) {
      Labels labels;
      labels.graph_label = c;
      ForwardTrace tr = forward(g, bundle.weights, cfg, labels);
      ModelWeights grads = backward(g, bundle.weights, cfg, tr, labels);
      const double d2 = weights_sq_diff(grads, bundle.grads, gnn_only);
      if (d2 < best) {
        best = d2;
        best_label = c;
      }
    }
    out.delta = std::sqrt(best);
    out.label_argmin = best_label;
  } else {
    if (bundle.labels.empty())
      throw Error(ErrorCode::invalid_argument,
                  "node-classification bundle carries no labels");
    // Candidate sizes can differ from the client graph's; labels are applied
    // by node index and extended cyclically when the candidate is larger.
    Labels labels;
    labels.node_labels.resize(g.n());
    for (int i = 0; i < g.n(); ++i)
      labels.node_labels[i] = bundle.labels[i % bundle.labels.size()];
    ForwardTrace tr = forward(g, bundle.weights, cfg, labels);
    ModelWeights grads = backward(g, bundle.weights, cfg, tr, labels);
    out.delta = std::sqrt(weights_sq_diff(grads, bundle.grads, gnn_only));
    out.label_argmin = -1;
  }
  out.relative = out.delta / std::max(obs_norm, 1e-30);
  return out;
}

}  // namespace grain
