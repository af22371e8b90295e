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

// Multicollinearity adjustment factors.
//
// For a coalition J = {t_1, ..., t_q} of numeric features and another numeric
// feature k, the adjustment factor is the linear form
//
//   AF_k(x) = sum_s a_s * x_{t_s}
//
// chosen so that cov(X_t, X_k + AF_k) = 0 for every t in J. Expanding the
// covariance gives the linear system A a = -c, where A is the covariance
// submatrix over J and c_t = cov(X_t, X_k). For q = 1 this reduces to
// a = -cov(X_j, X_k) / var(X_j); for q = 2 to the closed form in AfPair.

#ifndef MCCSHAP_ADJUST_HPP_
#define MCCSHAP_ADJUST_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mccshap/dataset.hpp"

namespace mccshap {

// A variance below this fraction of the mean numeric variance is treated as
// constant.
inline constexpr double kDegenerateVarianceRatio = 1e-12;
// Elimination pivots below this fraction of the largest Gram diagonal mark the
// coalition as linearly dependent.
inline constexpr double kSingularPivotRatio = 1e-10;
// Bound on |cov(X_t, X_k + AF_k)| / (sd_t * sd_k) enforced by BuildPlan.
inline constexpr double kOrthogonalityTolerance = 1e-8;

// Ordered set of distinct numeric feature indices.
class CoalitionSpec {
 public:
  CoalitionSpec(std::vector<std::size_t> indices, const CovarianceCache& cache);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(std::size_t k) const;

 private:
  std::vector<std::size_t> indices_;
};

double AfSingle(const CovarianceCache& cache, std::size_t j, std::size_t k);

// Solution (a, b) of
//   cov(X_i, X_k) + a var(X_i)     + b cov(X_i, X_j) = 0
//   cov(X_j, X_k) + a cov(X_i, X_j) + b var(X_j)     = 0
std::pair<double, double> AfPair(const CovarianceCache& cache, std::size_t i, std::size_t j,
                                 std::size_t k);

// Coefficients a (one per coalition member, in coalition order). q = 1 and
// q = 2 go through AfSingle and AfPair; larger coalitions are solved by
// partial-pivot elimination.
Eigen::VectorXd AfCoalition(const CovarianceCache& cache, const CoalitionSpec& coalition,
                            std::size_t k);

struct AdjustmentPlan {
  CoalitionSpec coalition;
  std::size_t width = 0;
  // Numeric features outside the coalition, ascending.
  std::vector<std::size_t> adjustable;
  // Row r holds the coefficients for adjustable[r].
  RowMatrix coefficients;
  // Non-numeric features, left untouched.
  std::vector<std::size_t> skipped;
  // Largest normalized |cov(X_t, X_k + AF_k)| measured on the build data.
  double max_normalized_residual = 0.0;

  bool all_zero() const;
};

// Builds coefficients for every adjustable feature and verifies the
// orthogonality bound empirically against `data`.
AdjustmentPlan BuildPlan(const CovarianceCache& cache, const DataMatrix& data,
                         const CoalitionSpec& coalition);

// row_k + sum_s a_s v_s for each adjustable k; other entries copied.
std::vector<double> ApplyPlan(const AdjustmentPlan& plan, std::span<const double> coalition_values,
                              std::span<const double> row);

// Audit table: one row per adjustable feature, one column per coalition member.
void WritePlanCsv(const AdjustmentPlan& plan, const std::vector<std::string>& names,
                  std::ostream& out);

}  // namespace mccshap

#endif  // MCCSHAP_ADJUST_HPP_
