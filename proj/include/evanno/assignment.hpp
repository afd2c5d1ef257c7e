#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "evanno/error.hpp"

namespace evanno {

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;

// Square copy of `costs` padded with zero-cost dummy rows or columns.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pad_square(
    const Eigen::MatrixBase<Derived>& costs) {
  using Scalar = typename Derived::Scalar;
  const auto n = std::max(costs.rows(), costs.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  out.topLeftCorner(costs.rows(), costs.cols()) = costs;
  return out;
}

// Minimum-cost one-to-one assignment of rows to columns (Kuhn-Munkres with
// row/column potentials, O(n^3)). Rectangular inputs are padded square with
// zero-cost dummies; pairs touching a dummy are dropped from the result.
// Pairs come back ordered by row. Among equal-cost alternatives the search
// prefers lower column indices, so the result is a pure function of the
// input matrix.
template <typename Derived>
std::vector<IndexPair> solve_assignment(const Eigen::MatrixBase<Derived>& costs) {
  using Scalar = typename Derived::Scalar;
  static_assert(std::is_floating_point_v<Scalar>, "solve_assignment needs a floating-point scalar");
  if (!costs.allFinite()) throw InputError("solve_assignment: cost matrix has non-finite entries");
  const auto rows = costs.rows();
  const auto cols = costs.cols();
  if (rows == 0 || cols == 0) return {};

  const auto a = pad_square(costs);
  const auto n = a.rows();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // 1-based arrays; column 0 is the virtual source of each augmenting search.
  std::vector<Scalar> u(n + 1, 0), v(n + 1, 0);
  std::vector<Eigen::Index> owner(n + 1, 0), way(n + 1, 0);
  std::vector<Scalar> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (Eigen::Index i = 1; i <= n; ++i) {
    owner[0] = i;
    Eigen::Index j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const auto i0 = owner[j0];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const auto j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> col_of_row(n, -1);
  for (Eigen::Index j = 1; j <= n; ++j) col_of_row[owner[j] - 1] = j - 1;
  std::vector<IndexPair> out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (col_of_row[r] < cols) out.emplace_back(r, col_of_row[r]);
  }
  return out;
}

// Sum of the matched entries, accumulated in row order.
template <typename Derived>
typename Derived::Scalar assignment_cost(const Eigen::MatrixBase<Derived>& costs,
                                         const std::vector<IndexPair>& pairs) {
  typename Derived::Scalar total = 0;
  for (const auto& [r, c] : pairs) total += costs(r, c);
  return total;
}

}  // namespace evanno
