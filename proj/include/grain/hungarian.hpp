#pragma once

// Minimum-cost assignment (Hungarian algorithm, potentials formulation,
// O(n^3)). Rectangular inputs are padded to square with a large sentinel;
// pairs assigned to padding are dropped, so a cost matrix of shape r x c
// yields min(r, c) matched pairs.

#include <grain/common.hpp>

#include <limits>
#include <utility>
#include <vector>

namespace grain {

constexpr double kAssignmentPadSentinel = 1e9;

// Optimal row -> column assignment for a square cost matrix.
inline std::vector<int> hungarian_square(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), rows ascending
  double total_cost = 0.0;
};

// Rectangular assignment via sentinel padding.
inline Assignment min_cost_assignment(const Matrix& cost) {
  Assignment out;
  const int r = static_cast<int>(cost.rows());
  const int c = static_cast<int>(cost.cols());
  if (r == 0 || c == 0) return out;
  const int n = std::max(r, c);
  Matrix padded = Matrix::Constant(n, n, kAssignmentPadSentinel);
  padded.topLeftCorner(r, c) = cost;
  const std::vector<int> row_to_col = hungarian_square(padded);
  for (int i = 0; i < r; ++i) {
    const int j = row_to_col[i];
    if (j < c) {
      out.pairs.push_back({i, j});
      out.total_cost += cost(i, j);
    }
  }
  return out;
}

}  // namespace grain
