#pragma once
// Kuhn-Munkres (Hungarian) algorithm for square assignment problems,
// O(n^3) shortest-augmenting-path formulation with row/column potentials.

#include <limits>
#include <vector>

#include "zonegraph/tensor.hpp"

namespace zonegraph {

/// Returns assignment[row] = column minimizing the total cost.
inline std::vector<int> solve_assignment_min(const Tensor& cost) {
  const int n = cost.rows();
  if (cost.cols() != n) throw DimensionError("assignment: cost matrix must be square");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
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
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

inline std::vector<int> solve_assignment_max(const Tensor& score) {
  Tensor neg = score;
  for (auto& v : neg.values) v = -v;
  return solve_assignment_min(neg);
}

inline double assignment_value(const Tensor& score, const std::vector<int>& assignment) {
  double s = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) s += score(static_cast<int>(i), assignment[i]);
  return s;
}

}  // namespace zonegraph
