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

#ifndef MCCSHAP_LINALG_HPP_
#define MCCSHAP_LINALG_HPP_

#include <cstddef>

#include <Eigen/Dense>

namespace mccshap {

struct PivotedSolve {
  Eigen::VectorXd solution;    // empty when singular
  double min_pivot = 0.0;      // smallest |pivot| met during elimination
  std::size_t weakest_row = 0; // original row index that produced min_pivot
  bool singular = false;
};

// Solves a * x = b by Gaussian elimination with partial pivoting. The system
// is declared singular when any pivot magnitude falls below
// pivot_ratio * max|diag(a)|.
PivotedSolve SolvePartialPivot(Eigen::MatrixXd a, Eigen::VectorXd b, double pivot_ratio);

}  // namespace mccshap

#endif  // MCCSHAP_LINALG_HPP_
