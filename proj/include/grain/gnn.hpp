#pragma once

// Forward and reverse passes for the two supported architectures.
//
// Layer l computes X^{l+1} = act(A^l (X^l W^l)) where A^l is either the
// degree-normalized adjacency (GCN, shared across layers) or per-head
// attention coefficients (GAT). Degrees entering the GCN normalization are
// the *declared* degrees plus one (self-inclusion), never the structural
// ones, so partial neighborhoods propagate exactly like the full graph.
//
// The readout applies two per-node linear maps with the activation in
// between; graph classification averages the per-node logits before the
// cross-entropy, node classification averages per-node cross-entropies.

#include <grain/graph.hpp>
#include <grain/model.hpp>

#include <cmath>
#include <vector>

namespace grain {

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

inline double activate(double x, Activation a) {
  if (a == Activation::relu) return x > 0.0 ? x : 0.0;
  // GELU, exact form.
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

inline double activate_grad(double x, Activation a) {
  if (a == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double Phi = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  return Phi + x * phi;
}

inline Matrix apply_activation(const Matrix& m, Activation a) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = activate(m(i, j), a);
  return out;
}

inline Matrix activation_grad_matrix(const Matrix& pre, Activation a) {
  Matrix out(pre.rows(), pre.cols());
  for (Eigen::Index i = 0; i < pre.rows(); ++i)
    for (Eigen::Index j = 0; j < pre.cols(); ++j)
      out(i, j) = activate_grad(pre(i, j), a);
  return out;
}

// One-hot feature matrix X^0 (n x one_hot_width).
inline Matrix one_hot_matrix(const Graph& g) {
  Matrix x(g.n(), g.schema()->one_hot_width());
  for (int i = 0; i < g.n(); ++i) x.row(i) = g.schema()->one_hot(g.node(i)).transpose();
  return x;
}

// Degree-normalized adjacency with self-inclusion:
// A[i][j] = 1/sqrt((deg(i)+1)(deg(j)+1)) for j in N(i) or j == i, with deg the
// declared degree. Rejects nodes whose declared degree cannot account for
// their structural neighbors.
inline Matrix normalized_adjacency_gcn(const Graph& g) {
  Matrix a = Matrix::Zero(g.n(), g.n());
  std::vector<double> inv_sqrt(g.n());
  for (int i = 0; i < g.n(); ++i) {
    if (g.declared_degree(i) < g.structural_degree(i))
      throw Error(ErrorCode::invalid_graph,
                  "node " + std::to_string(i) +
                      " declares fewer neighbors than it structurally has");
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.declared_degree(i)) + 1.0);
  }
  for (int i = 0; i < g.n(); ++i) {
    a(i, i) = inv_sqrt[i] * inv_sqrt[i];
    for (int j : g.neighbors(i)) a(i, j) = inv_sqrt[i] * inv_sqrt[j];
  }
  return a;
}

constexpr double kAttentionLeakySlope = 0.2;

// Per-layer, per-head attention state kept for the backward pass.
struct AttentionTrace {
  std::vector<Matrix> coeff;  // per head: row-softmax coefficients (n x n, masked)
  std::vector<Vector> src;    // per head: a_src . y_i
  std::vector<Vector> dst;    // per head: a_dst . y_j
};

struct ForwardTrace {
  std::vector<Matrix> x;  // x[l] = X^l for l = 0..L (x[L] feeds the readout)
  std::vector<Matrix> y;  // y[l] = X^l W^l
  std::vector<Matrix> z;  // z[l] = A^l y[l] (pre-activation)
  Matrix gcn_adj;         // GCN only
  std::vector<AttentionTrace> attn;  // GAT only, per layer

  Matrix readout_pre;   // X^L V1
  Matrix readout_hidden;
  Matrix logits;        // per-node logits
  Vector pooled;        // mean-pooled logits (graph task)
  double loss = 0.0;
};

namespace detail {

// Attention coefficients for one GAT layer given Y = X W. Neighborhoods
// always include the node itself.
inline AttentionTrace attention_coefficients(const Graph& g, const Matrix& y,
                                             const Matrix& attn_params, int heads) {
  const int n = g.n();
  const int head_dim = static_cast<int>(y.cols()) / heads;
  AttentionTrace tr;
  tr.coeff.reserve(heads);
  tr.src.reserve(heads);
  tr.dst.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    const auto yh = y.middleCols(h * head_dim, head_dim);
    const Vector a_src = attn_params.row(h).head(head_dim).transpose();
    const Vector a_dst = attn_params.row(h).tail(head_dim).transpose();
    Vector s = yh * a_src;
    Vector t = yh * a_dst;
    Matrix coeff = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> nbh;
      nbh.reserve(g.neighbors(i).size() + 1);
      nbh.push_back(i);
      for (int j : g.neighbors(i)) nbh.push_back(j);
      double m = -std::numeric_limits<double>::infinity();
      for (int j : nbh) m = std::max(m, leaky_relu(s[i] + t[j], kAttentionLeakySlope));
      double denom = 0.0;
      for (int j : nbh) {
        const double e = std::exp(leaky_relu(s[i] + t[j], kAttentionLeakySlope) - m);
        coeff(i, j) = e;
        denom += e;
      }
      for (int j : nbh) coeff(i, j) /= denom;
    }
    tr.coeff.push_back(std::move(coeff));
    tr.src.push_back(std::move(s));
    tr.dst.push_back(std::move(t));
  }
  return tr;
}

// Runs GNN layers 0..upto-1, recording everything needed for backward.
inline ForwardTrace run_gnn_layers(const Graph& g, const ModelWeights& w,
                                   const ModelConfig& cfg, int upto) {
  if (g.schema()->one_hot_width() != cfg.input_dim ||
      (upto > 0 && w.gnn[0].rows() != cfg.input_dim))
    throw Error(ErrorCode::shape_mismatch, "schema width does not match input_dim");
  ForwardTrace tr;
  tr.x.push_back(one_hot_matrix(g));
  if (cfg.arch == Arch::gcn) tr.gcn_adj = normalized_adjacency_gcn(g);
  for (int l = 0; l < upto; ++l) {
    const Matrix& x = tr.x.back();
    Matrix y = x * w.gnn[l];
    Matrix z;
    if (cfg.arch == Arch::gcn) {
      z = tr.gcn_adj * y;
    } else {
      AttentionTrace at =
          attention_coefficients(g, y, w.attn[l], cfg.heads);
      const int head_dim = cfg.hidden_dim / cfg.heads;
      z = Matrix(g.n(), cfg.hidden_dim);
      for (int h = 0; h < cfg.heads; ++h) {
        z.middleCols(h * head_dim, head_dim) =
            at.coeff[h] * y.middleCols(h * head_dim, head_dim);
      }
      tr.attn.push_back(std::move(at));
    }
    tr.x.push_back(apply_activation(z, cfg.activation));
    tr.y.push_back(std::move(y));
    tr.z.push_back(std::move(z));
  }
  return tr;
}

inline Vector softmax(const Vector& v) {
  const double m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

}  // namespace detail

struct Labels {
  int graph_label = 0;
  std::vector<int> node_labels;  // node task only
};

// Full forward pass including readout and loss.
inline ForwardTrace forward(const Graph& g, const ModelWeights& w,
                            const ModelConfig& cfg, const Labels& labels) {
  cfg.validate();
  if (g.n() == 0) throw Error(ErrorCode::invalid_argument, "forward: empty graph");
  if (g.schema()->one_hot_width() != cfg.input_dim)
    throw Error(ErrorCode::shape_mismatch, "schema width does not match input_dim");
  ForwardTrace tr = detail::run_gnn_layers(g, w, cfg, cfg.num_gnn_layers);
  tr.readout_pre = tr.x.back() * w.readout1;
  tr.readout_hidden = apply_activation(tr.readout_pre, cfg.activation);
  tr.logits = tr.readout_hidden * w.readout2;
  if (cfg.task == Task::graph_classification) {
    if (labels.graph_label < 0 || labels.graph_label >= cfg.num_classes)
      throw Error(ErrorCode::invalid_argument, "graph label out of range");
    tr.pooled = tr.logits.colwise().mean().transpose();
    const Vector p = detail::softmax(tr.pooled);
    tr.loss = -std::log(std::max(p[labels.graph_label], 1e-300));
  } else {
    if (static_cast<int>(labels.node_labels.size()) != g.n())
      throw Error(ErrorCode::invalid_argument, "need one label per node");
    double loss = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      const int y = labels.node_labels[i];
      if (y < 0 || y >= cfg.num_classes)
        throw Error(ErrorCode::invalid_argument, "node label out of range");
      const Vector p = detail::softmax(tr.logits.row(i).transpose());
      loss -= std::log(std::max(p[y], 1e-300));
    }
    tr.loss = loss / g.n();
  }
  return tr;
}

// Reverse pass: gradients of the loss wrt every weight. The gradient of a
// layer's weight always factors as X^T dY with dY the *total* gradient at
// Y = X W; for GAT that total includes the paths through the attention
// logits, which is what makes dY generically full-rank.
inline ModelWeights backward(const Graph& g, const ModelWeights& w,
                             const ModelConfig& cfg, const ForwardTrace& tr,
                             const Labels& labels) {
  ModelWeights grads = w.zeros_like();
  const int n = g.n();

  Matrix d_logits(n, cfg.num_classes);
  if (cfg.task == Task::graph_classification) {
    Vector dq = detail::softmax(tr.pooled);
    dq[labels.graph_label] -= 1.0;
    for (int i = 0; i < n; ++i) d_logits.row(i) = dq.transpose() / n;
  } else {
    for (int i = 0; i < n; ++i) {
      Vector dp = detail::softmax(tr.logits.row(i).transpose());
      dp[labels.node_labels[i]] -= 1.0;
      d_logits.row(i) = dp.transpose() / n;
    }
  }

  grads.readout2 = tr.readout_hidden.transpose() * d_logits;
  Matrix d_hidden = d_logits * w.readout2.transpose();
  Matrix d_pre =
      d_hidden.cwiseProduct(activation_grad_matrix(tr.readout_pre, cfg.activation));
  grads.readout1 = tr.x.back().transpose() * d_pre;
  Matrix dx = d_pre * w.readout1.transpose();

  for (int l = cfg.num_gnn_layers - 1; l >= 0; --l) {
    Matrix dz = dx.cwiseProduct(activation_grad_matrix(tr.z[l], cfg.activation));
    Matrix dy;
    if (cfg.arch == Arch::gcn) {
      dy = tr.gcn_adj.transpose() * dz;
    } else {
      const int head_dim = cfg.hidden_dim / cfg.heads;
      const AttentionTrace& at = tr.attn[l];
      dy = Matrix::Zero(n, cfg.hidden_dim);
      for (int h = 0; h < cfg.heads; ++h) {
        const auto yh = tr.y[l].middleCols(h * head_dim, head_dim);
        const auto dzh = dz.middleCols(h * head_dim, head_dim);
        const Matrix& coeff = at.coeff[h];
        Matrix dyh = coeff.transpose() * dzh;

        // Backward through the softmax coefficients and attention logits.
        Vector ds = Vector::Zero(n);
        Vector dt = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
          std::vector<int> nbh;
          nbh.reserve(g.neighbors(i).size() + 1);
          nbh.push_back(i);
          for (int j : g.neighbors(i)) nbh.push_back(j);
          double inner = 0.0;
          std::vector<double> dalpha(nbh.size());
          for (std::size_t k = 0; k < nbh.size(); ++k) {
            dalpha[k] = dzh.row(i).dot(yh.row(nbh[k]));
            inner += coeff(i, nbh[k]) * dalpha[k];
          }
          for (std::size_t k = 0; k < nbh.size(); ++k) {
            const int j = nbh[k];
            const double de = coeff(i, j) * (dalpha[k] - inner);
            const double dpre_ij =
                de * leaky_relu_grad(at.src[h][i] + at.dst[h][j], kAttentionLeakySlope);
            ds[i] += dpre_ij;
            dt[j] += dpre_ij;
          }
        }
        const Vector a_src = w.attn[l].row(h).head(head_dim).transpose();
        const Vector a_dst = w.attn[l].row(h).tail(head_dim).transpose();
        dyh.noalias() += ds * a_src.transpose();
        dyh.noalias() += dt * a_dst.transpose();
        grads.attn[l].row(h).head(head_dim) = (yh.transpose() * ds).transpose();
        grads.attn[l].row(h).tail(head_dim) = (yh.transpose() * dt).transpose();
        dy.middleCols(h * head_dim, head_dim) = dyh;
      }
    }
    grads.gnn[l] = tr.x[l].transpose() * dy;
    dx = dy * w.gnn[l].transpose();
  }
  return grads;
}

// The layer-l input embedding of a block's center, computed on the block
// alone. For an l-hop block this equals the center's row of X^l on the full
// graph: the recursion only ever touches complete regions of the block, and
// the degree normalization reads declared degrees.
inline Vector propagate_block(const BuildingBlock& b, const ModelWeights& w,
                              const ModelConfig& cfg, int l) {
  if (l < 0 || l > cfg.num_gnn_layers)
    throw Error(ErrorCode::invalid_argument, "propagate_block: bad layer index");
  if (b.hop < l && !dangling_nodes(b.graph).empty())
    throw Error(ErrorCode::invalid_argument,
                "propagate_block: block radius too small for requested depth");
  ForwardTrace tr = detail::run_gnn_layers(b.graph, w, cfg, l);
  return tr.x[l].row(b.center).transpose();
}

// Runs one honest client step and packages everything the server would see.
inline GradientBundle simulate_client_step(const Graph& g, const ModelConfig& cfg,
                                           const Labels& labels) {
  GradientBundle bundle;
  bundle.schema = g.schema();
  bundle.config = cfg;
  bundle.weights = init_weights(cfg);
  ForwardTrace tr = forward(g, bundle.weights, cfg, labels);
  bundle.grads = backward(g, bundle.weights, cfg, tr, labels);
  if (cfg.task == Task::node_classification) bundle.labels = labels.node_labels;
  return bundle;
}

}  // namespace grain
