/*
 * Copyright 2026 The mccshap Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mccshap/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace mccshap {

PivotedSolve SolvePartialPivot(Eigen::MatrixXd a, Eigen::VectorXd b, double pivot_ratio) {
  const Eigen::Index n = a.rows();
  PivotedSolve result;
  result.min_pivot = std::numeric_limits<double>::infinity();
  const double floor = pivot_ratio * a.diagonal().cwiseAbs().maxCoeff();

  std::vector<std::size_t> origin(static_cast<std::size_t>(n));
  std::iota(origin.begin(), origin.end(), std::size_t{0});

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot_row = col;
    double best = std::abs(a(col, col));
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > best) {
        best = std::abs(a(r, col));
        pivot_row = r;
      }
    }
    if (pivot_row != col) {
      a.row(col).swap(a.row(pivot_row));
      std::swap(b[col], b[pivot_row]);
      std::swap(origin[static_cast<std::size_t>(col)], origin[static_cast<std::size_t>(pivot_row)]);
    }
    if (best < result.min_pivot) {
      result.min_pivot = best;
      result.weakest_row = origin[static_cast<std::size_t>(col)];
    }
    if (!(best >= floor) || best == 0.0) {
      result.singular = true;
      return result;
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      if (factor == 0.0) continue;
      a(r, col) = 0.0;
      for (Eigen::Index c = col + 1; c < n; ++c) a(r, c) -= factor * a(col, c);
      b[r] -= factor * b[col];
    }
  }

  Eigen::VectorXd x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (Eigen::Index c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    x[r] = s / a(r, r);
  }
  result.solution = std::move(x);
  return result;
}

}  // namespace mccshap
