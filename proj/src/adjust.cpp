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

#include "mccshap/adjust.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include "mccshap/error.hpp"
#include "mccshap/linalg.hpp"

namespace mccshap {
namespace {

void RequireNumeric(const CovarianceCache& cache, std::size_t j) {
  if (j >= cache.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature index " + std::to_string(j) + " out of range");
  }
  if (!cache.is_numeric(j)) {
    throw Error(ErrorCode::kNonNumericFeature,
                "feature " + std::to_string(j) + " is not numeric; adjustment is undefined");
  }
}

void RequireVariance(const CovarianceCache& cache, std::size_t j) {
  const double floor = kDegenerateVarianceRatio * cache.mean_numeric_variance();
  if (!(cache.variance(j) > floor)) {
    throw Error(ErrorCode::kDegenerateVariance,
                "feature " + std::to_string(j) + " is (numerically) constant");
  }
}

}  // namespace

CoalitionSpec::CoalitionSpec(std::vector<std::size_t> indices, const CovarianceCache& cache)
    : indices_(std::move(indices)) {
  if (indices_.empty()) {
    throw Error(ErrorCode::kEmptyCoalition, "coalition has no members");
  }
  std::set<std::size_t> seen;
  for (std::size_t j : indices_) {
    RequireNumeric(cache, j);
    if (!seen.insert(j).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature " + std::to_string(j) + " listed twice in coalition");
    }
  }
}

bool CoalitionSpec::contains(std::size_t k) const {
  return std::find(indices_.begin(), indices_.end(), k) != indices_.end();
}

double AfSingle(const CovarianceCache& cache, std::size_t j, std::size_t k) {
  RequireNumeric(cache, j);
  RequireNumeric(cache, k);
  if (j == k) {
    throw Error(ErrorCode::kInvalidArgument, "adjusted feature equals the coalition feature");
  }
  RequireVariance(cache, j);
  return -cache.cov(j, k) / cache.variance(j);
}

std::pair<double, double> AfPair(const CovarianceCache& cache, std::size_t i, std::size_t j,
                                 std::size_t k) {
  RequireNumeric(cache, i);
  RequireNumeric(cache, j);
  RequireNumeric(cache, k);
  if (i == j || i == k || j == k) {
    throw Error(ErrorCode::kInvalidArgument, "pair adjustment needs three distinct features");
  }
  RequireVariance(cache, i);
  RequireVariance(cache, j);
  const double var_i = cache.variance(i);
  const double var_j = cache.variance(j);
  const double cov_ij = cache.cov(i, j);
  const double cov_ik = cache.cov(i, k);
  const double cov_jk = cache.cov(j, k);
  const double det = var_i * var_j - cov_ij * cov_ij;

  // Same acceptance rule as the elimination path: the pivots of a 2x2
  // partial-pivot elimination are max(|var_i|, |cov_ij|) and det over it.
  const double first_pivot = std::max(std::abs(var_i), std::abs(cov_ij));
  const double second_pivot = std::abs(det) / first_pivot;
  const double floor = kSingularPivotRatio * std::max(var_i, var_j);
  if (!(second_pivot >= floor) || det == 0.0) {
    throw Error(ErrorCode::kSingularCoalition,
                "features " + std::to_string(i) + " and " + std::to_string(j) +
                    " are linearly dependent (smallest pivot " + FormatDouble(second_pivot) + ")");
  }
  const double a = -(cov_ik * var_j - cov_jk * cov_ij) / det;
  const double b = -(cov_jk * var_i - cov_ik * cov_ij) / det;
  return {a, b};
}

Eigen::VectorXd AfCoalition(const CovarianceCache& cache, const CoalitionSpec& coalition,
                            std::size_t k) {
  RequireNumeric(cache, k);
  if (coalition.contains(k)) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature " + std::to_string(k) + " is a coalition member");
  }
  const auto& idx = coalition.indices();
  const auto q = static_cast<Eigen::Index>(idx.size());
  if (q == 1) {
    return Eigen::VectorXd::Constant(1, AfSingle(cache, idx[0], k));
  }
  if (q == 2) {
    const auto [a, b] = AfPair(cache, idx[0], idx[1], k);
    Eigen::VectorXd out(2);
    out << a, b;
    return out;
  }
  for (std::size_t t : idx) RequireVariance(cache, t);
  Eigen::MatrixXd gram(q, q);
  Eigen::VectorXd rhs(q);
  for (Eigen::Index r = 0; r < q; ++r) {
    for (Eigen::Index c = 0; c < q; ++c) {
      gram(r, c) = cache.cov(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
    }
    rhs[r] = -cache.cov(idx[static_cast<std::size_t>(r)], k);
  }
  auto solved = SolvePartialPivot(std::move(gram), std::move(rhs), kSingularPivotRatio);
  if (solved.singular) {
    throw Error(ErrorCode::kSingularCoalition,
                "coalition is linearly dependent near feature " +
                    std::to_string(idx[solved.weakest_row]) + " (smallest pivot " +
                    FormatDouble(solved.min_pivot) + ")");
  }
  return solved.solution;
}

bool AdjustmentPlan::all_zero() const {
  return coefficients.size() == 0 || (coefficients.array() == 0.0).all();
}

AdjustmentPlan BuildPlan(const CovarianceCache& cache, const DataMatrix& data,
                         const CoalitionSpec& coalition) {
  if (data.cols() != cache.size()) {
    throw Error(ErrorCode::kWidthMismatch, "covariance cache and data disagree on width");
  }
  const std::size_t m = data.cols();
  const auto q = static_cast<Eigen::Index>(coalition.size());
  AdjustmentPlan plan{coalition, m, {}, {}, {}, 0.0};
  for (std::size_t k = 0; k < m; ++k) {
    if (coalition.contains(k)) continue;
    (data.is_numeric(k) ? plan.adjustable : plan.skipped).push_back(k);
  }
  plan.coefficients.resize(static_cast<Eigen::Index>(plan.adjustable.size()), q);
  for (std::size_t r = 0; r < plan.adjustable.size(); ++r) {
    Eigen::VectorXd a;
    try {
      a = AfCoalition(cache, coalition, plan.adjustable[r]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularCoalition) throw;
      std::string members;
      for (std::size_t t : coalition.indices()) {
        members += (members.empty() ? "" : ", ") + data.names()[t];
      }
      const std::string detail = e.what();
      throw Error(e.code(), "coalition {" + members + "}: " + detail.substr(detail.find(": ") + 2));
    }
    if (!a.allFinite()) {
      throw Error(ErrorCode::kSingularCoalition, "non-finite adjustment coefficient");
    }
    plan.coefficients.row(static_cast<Eigen::Index>(r)) = a.transpose();
  }

  // Empirical check: cov(X_t, X_k + AF_k) over the rows of `data`.
  const auto n = static_cast<Eigen::Index>(data.rows());
  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd members(n, q);
  Eigen::VectorXd member_sd(q);
  for (Eigen::Index s = 0; s < q; ++s) {
    const auto col = data.values().col(static_cast<Eigen::Index>(coalition.indices()[s]));
    members.col(s) = col.array() - col.mean();
    member_sd[s] = std::sqrt(members.col(s).squaredNorm() / denom);
  }
  for (std::size_t r = 0; r < plan.adjustable.size(); ++r) {
    const auto col = data.values().col(static_cast<Eigen::Index>(plan.adjustable[r]));
    const Eigen::VectorXd centered = col.array() - col.mean();
    const double sd_k = std::sqrt(centered.squaredNorm() / denom);
    const Eigen::VectorXd adjusted =
        centered + members * plan.coefficients.row(static_cast<Eigen::Index>(r)).transpose();
    for (Eigen::Index s = 0; s < q; ++s) {
      const double residual = std::abs(members.col(s).dot(adjusted) / denom);
      const double scale = member_sd[s] * sd_k;
      if (residual > kOrthogonalityTolerance * scale) {
        throw Error(ErrorCode::kOrthogonalityViolation,
                    "adjusted feature " + data.names()[plan.adjustable[r]] +
                        " keeps normalized covariance " + FormatDouble(residual / scale) +
                        " with " + data.names()[coalition.indices()[s]]);
      }
      if (scale > 0.0) {
        plan.max_normalized_residual = std::max(plan.max_normalized_residual, residual / scale);
      }
    }
  }
  return plan;
}

std::vector<double> ApplyPlan(const AdjustmentPlan& plan, std::span<const double> coalition_values,
                              std::span<const double> row) {
  if (row.size() != plan.width) {
    throw Error(ErrorCode::kWidthMismatch, "row width " + std::to_string(row.size()) +
                                               " does not match plan width " +
                                               std::to_string(plan.width));
  }
  if (coalition_values.size() != plan.coalition.size()) {
    throw Error(ErrorCode::kWidthMismatch, "expected one value per coalition member");
  }
  std::vector<double> out(row.begin(), row.end());
  const auto q = static_cast<Eigen::Index>(coalition_values.size());
  for (std::size_t r = 0; r < plan.adjustable.size(); ++r) {
    double shift = 0.0;
    for (Eigen::Index s = 0; s < q; ++s) {
      shift += plan.coefficients(static_cast<Eigen::Index>(r), s) *
               coalition_values[static_cast<std::size_t>(s)];
    }
    out[plan.adjustable[r]] += shift;
  }
  return out;
}

void WritePlanCsv(const AdjustmentPlan& plan, const std::vector<std::string>& names,
                  std::ostream& out) {
  out << "feature";
  for (std::size_t t : plan.coalition.indices()) out << ",coef_" << names.at(t);
  out << '\n';
  for (std::size_t r = 0; r < plan.adjustable.size(); ++r) {
    out << names.at(plan.adjustable[r]);
    for (Eigen::Index s = 0; s < plan.coefficients.cols(); ++s) {
      out << ',' << FormatDouble(plan.coefficients(static_cast<Eigen::Index>(r), s));
    }
    out << '\n';
  }
}

}  // namespace mccshap
