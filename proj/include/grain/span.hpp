#pragma once

// Column-span machinery behind every filtering step. A weight gradient
// factors as X^T dY, so (for full-rank dY and n < d) its column span equals
// the row span of the layer input X: membership of a candidate embedding in
// that span is the reconstruction signal.

#include <grain/common.hpp>

#include <Eigen/SVD>

#include <vector>

namespace grain {

// Relative singular-value cutoff for basis truncation.
constexpr double kSpanBasisTol = 1e-10;
// Relative residual above which a row counts as outside a span.
constexpr double kRecoverableTol = 1e-8;

struct SpanBasis {
  Matrix q;  // orthonormal columns spanning the column space
  int rank = 0;
  int dim = 0;  // ambient dimension (rows of q)
};

// Orthonormal basis of the column span of `m` (or of its first
// `row_prefix` rows when given), truncating singular values below
// kSpanBasisTol * sigma_max.
inline SpanBasis build_span_basis(const Matrix& m, int row_prefix = -1) {
  Matrix a = (row_prefix >= 0 && row_prefix < m.rows())
                 ? Matrix(m.topRows(row_prefix))
                 : m;
  SpanBasis basis;
  basis.dim = static_cast<int>(a.rows());
  if (a.rows() == 0 || a.cols() == 0 || a.norm() == 0.0) {
    basis.q = Matrix::Zero(a.rows(), 0);
    return basis;
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = kSpanBasisTol * sv[0];
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  basis.q = svd.matrixU().leftCols(rank);
  basis.rank = rank;
  return basis;
}

inline int numeric_rank(const Matrix& m) { return build_span_basis(m).rank; }

// Relative distance of z from the span: ||z - QQ^T z|| / max(||z||, 1e-30).
inline double span_distance(const Vector& z, const SpanBasis& basis) {
  if (z.size() != basis.dim)
    throw Error(ErrorCode::shape_mismatch, "span_distance: dimension mismatch");
  const double zn = z.norm();
  Vector residual = z;
  if (basis.rank > 0) residual.noalias() -= basis.q * (basis.q.transpose() * z);
  return residual.norm() / std::max(zn, 1e-30);
}

// Indices i whose row of dY lies outside the row span of the other rows;
// exactly the nodes whose layer input is exposed by the weight gradient.
inline std::vector<int> recoverable_rows(const Matrix& grad_y) {
  std::vector<int> out;
  const int n = static_cast<int>(grad_y.rows());
  for (int i = 0; i < n; ++i) {
    Matrix others(n - 1, grad_y.cols());
    int r = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.row(r++) = grad_y.row(j);
    }
    SpanBasis basis = build_span_basis(Matrix(others.transpose()));
    const double d = span_distance(grad_y.row(i).transpose(), basis);
    if (d > kRecoverableTol) out.push_back(i);
  }
  return out;
}

}  // namespace grain
