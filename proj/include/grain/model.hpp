#pragma once

// Model definition shared by simulation and attack: a stack of graph
// convolution layers (plain or attention-based) followed by a fixed two-layer
// per-node readout. No biases anywhere; all arithmetic in f64.

#include <grain/common.hpp>
#include <grain/schema.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace grain {

enum class Arch { gcn, gat };
enum class Activation { relu, gelu };

inline const char* arch_name(Arch a) { return a == Arch::gcn ? "gcn" : "gat"; }
inline const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "gelu";
}

struct ModelConfig {
  Arch arch = Arch::gcn;
  int num_gnn_layers = 2;
  int hidden_dim = 300;
  int heads = 2;  // attention heads per GAT layer; ignored for GCN
  Activation activation = Activation::relu;
  int readout_layers = 2;  // fixed by design
  int input_dim = 0;       // one-hot width of the feature schema
  int num_classes = 2;
  Task task = Task::graph_classification;
  std::uint64_t seed = 0;

  int layer_in_dim(int l) const { return l == 0 ? input_dim : hidden_dim; }

  void validate() const {
    if (num_gnn_layers < 1)
      throw Error(ErrorCode::invalid_argument, "need at least one GNN layer");
    if (hidden_dim < 1)
      throw Error(ErrorCode::invalid_argument, "hidden_dim must be positive");
    if (input_dim < 1)
      throw Error(ErrorCode::invalid_argument, "input_dim must be positive");
    if (num_classes < 2)
      throw Error(ErrorCode::invalid_argument, "need at least two classes");
    if (readout_layers != 2)
      throw Error(ErrorCode::invalid_argument, "readout depth is fixed at two layers");
    if (arch == Arch::gat) {
      if (heads < 1 || hidden_dim % heads != 0)
        throw Error(ErrorCode::invalid_argument,
                    "hidden_dim must be divisible by the head count");
    }
  }
};

// Weight set; gradients reuse the same shape. For GAT layers, `attn[l]` holds
// one attention vector per head as rows of length 2*(hidden_dim/heads),
// split as [source half | destination half].
struct ModelWeights {
  std::vector<Matrix> gnn;   // gnn[l]: layer_in_dim(l) x hidden_dim
  std::vector<Matrix> attn;  // GAT only: heads x (2*hidden_dim/heads) per layer
  Matrix readout1;           // hidden_dim x hidden_dim
  Matrix readout2;           // hidden_dim x num_classes

  ModelWeights zeros_like() const {
    ModelWeights z;
    z.gnn.reserve(gnn.size());
    for (const auto& w : gnn) z.gnn.push_back(Matrix::Zero(w.rows(), w.cols()));
    z.attn.reserve(attn.size());
    for (const auto& a : attn) z.attn.push_back(Matrix::Zero(a.rows(), a.cols()));
    z.readout1 = Matrix::Zero(readout1.rows(), readout1.cols());
    z.readout2 = Matrix::Zero(readout2.rows(), readout2.cols());
    return z;
  }
};

// Entries are drawn i.i.d. uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the
// config seed, row-major, in a fixed order: each GNN layer's weight matrix
// (then its attention rows for GAT), then the two readout matrices.
inline ModelWeights init_weights(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  auto draw = [&rng](Matrix& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = rng.uniform(-bound, bound);
      }
    }
  };
  ModelWeights w;
  for (int l = 0; l < cfg.num_gnn_layers; ++l) {
    Matrix wl(cfg.layer_in_dim(l), cfg.hidden_dim);
    draw(wl, cfg.layer_in_dim(l));
    w.gnn.push_back(std::move(wl));
    if (cfg.arch == Arch::gat) {
      const int head_dim = cfg.hidden_dim / cfg.heads;
      Matrix al(cfg.heads, 2 * head_dim);
      draw(al, 2 * head_dim);
      w.attn.push_back(std::move(al));
    }
  }
  w.readout1 = Matrix(cfg.hidden_dim, cfg.hidden_dim);
  draw(w.readout1, cfg.hidden_dim);
  w.readout2 = Matrix(cfg.hidden_dim, cfg.num_classes);
  draw(w.readout2, cfg.hidden_dim);
  return w;
}

// One observed FedSGD step: the (public) feature schema, config, the weights
// the step was taken at, and the loss gradient for every weight.
// Node-classification bundles also carry the per-node labels (known to the
// attacker in that setting).
struct GradientBundle {
  SchemaPtr schema;
  ModelConfig config;
  ModelWeights weights;
  ModelWeights grads;
  std::vector<int> labels;  // node task only; empty otherwise

  void validate() const {
    config.validate();
    if (schema) {
      schema->validate();
      if (schema->one_hot_width() != config.input_dim)
        throw Error(ErrorCode::shape_mismatch,
                    "schema width does not match config input_dim");
    }
    auto check = [](const Matrix& a, const Matrix& b, const std::string& name) {
      if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorCode::shape_mismatch, "gradient shape mismatch for " + name);
    };
    if (weights.gnn.size() != grads.gnn.size() ||
        weights.attn.size() != grads.attn.size())
      throw Error(ErrorCode::shape_mismatch, "weight/gradient layer count mismatch");
    for (std::size_t l = 0; l < weights.gnn.size(); ++l)
      check(weights.gnn[l], grads.gnn[l], "gnn." + std::to_string(l));
    for (std::size_t l = 0; l < weights.attn.size(); ++l)
      check(weights.attn[l], grads.attn[l], "attn." + std::to_string(l));
    check(weights.readout1, grads.readout1, "readout1");
    check(weights.readout2, grads.readout2, "readout2");
  }
};

// Squared Frobenius norm of the difference between two same-shape weight
// sets, summed over either all matrices or the GNN stack only.
inline double weights_sq_diff(const ModelWeights& a, const ModelWeights& b,
                              bool gnn_only = false) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.gnn.size(); ++l)
    s += (a.gnn[l] - b.gnn[l]).squaredNorm();
  for (std::size_t l = 0; l < a.attn.size(); ++l)
    s += (a.attn[l] - b.attn[l]).squaredNorm();
  if (!gnn_only) {
    s += (a.readout1 - b.readout1).squaredNorm();
    s += (a.readout2 - b.readout2).squaredNorm();
  }
  return s;
}

inline double weights_sq_norm(const ModelWeights& a, bool gnn_only = false) {
  double s = 0.0;
  for (const auto& m : a.gnn) s += m.squaredNorm();
  for (const auto& m : a.attn) s += m.squaredNorm();
  if (!gnn_only) {
    s += a.readout1.squaredNorm();
    s += a.readout2.squaredNorm();
  }
  return s;
}

}  // namespace grain
