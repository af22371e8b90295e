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

// Monte-Carlo permutation Shapley estimation with and without the
// multicollinearity correction (MCC / NMCC), for single features and for
// feature coalitions played as one block.
//
// Each iteration draws a donor row x^(r) uniformly from the background and a
// uniform random ordering of the players (the non-coalition features plus the
// coalition block). Players ordered before the block take instance values,
// the rest take donor values; x_{+J} carries the instance's coalition values
// and x_{-J} the donor's. The marginal is f(x_{+J}) - f(x_{-J}).
//
// In MCC mode every numeric non-coalition feature k is expressed in the
// decorrelated coordinate z_k = x_k + AF_k(x_J), which has zero empirical
// covariance with each coalition member. A feature keeps the z value of its
// source row and is mapped back to model space with the coalition values of
// the vector being built:
//
//   x_k = src_k + a_k . (src_J - vec_J)
//
// so instance-sourced features move in x_{-J} and donor-sourced features move
// in x_{+J}. With all coefficients zero the construction is exactly NMCC.
//
// Iteration t draws from a stream keyed by (seed, coalition, t); marginals are
// aggregated with fixed-order pairwise summation, so results are bitwise
// identical for any worker count.

#ifndef MCCSHAP_SHAPLEY_HPP_
#define MCCSHAP_SHAPLEY_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccshap/adjust.hpp"
#include "mccshap/dataset.hpp"
#include "mccshap/error.hpp"
#include "mccshap/models.hpp"

namespace mccshap {

enum class Mode { kNmcc, kMcc };

std::string_view ModeName(Mode mode);

// Background data plus its covariance statistics, computed once.
class Background {
 public:
  explicit Background(DataMatrix data);

  const DataMatrix& data() const { return data_; }
  const CovarianceCache& covariance() const { return covariance_; }

 private:
  DataMatrix data_;
  CovarianceCache covariance_;
};

struct EstimatorConfig {
  std::int64_t iterations = 10000;
  std::uint64_t seed = 42;
  Mode mode = Mode::kMcc;
  std::shared_ptr<const Background> background;
  int workers = 1;
};

struct ShapleyEstimate {
  double value = 0.0;
  // Sample standard deviation of the per-iteration marginals over sqrt(M).
  double std_error = 0.0;
  std::int64_t iterations = 0;
  std::vector<std::size_t> target;
  Mode mode = Mode::kNmcc;
};

ShapleyEstimate EstimateSingle(const Predictor& model, const EstimatorConfig& config,
                               std::span<const double> instance, std::size_t feature);

ShapleyEstimate EstimateCoalition(const Predictor& model, const EstimatorConfig& config,
                                  std::span<const double> instance,
                                  std::span<const std::size_t> coalition);

struct FeatureOutcome {
  std::size_t feature = 0;
  std::optional<ShapleyEstimate> estimate;
  std::optional<ErrorCode> error;
  std::string message;
};

// One EstimateSingle per feature. Failures are collected, not thrown.
std::vector<FeatureOutcome> EstimateAll(const Predictor& model, const EstimatorConfig& config,
                                        std::span<const double> instance);

// Exact Shapley value by subset enumeration, where v(S) is the mean over
// background rows of f(instance on S, background row elsewhere).
// Limited to 12 features and 64 background rows.
inline constexpr std::size_t kExactMaxFeatures = 12;
inline constexpr std::size_t kExactMaxBackgroundRows = 64;

double ExactShapley(const Predictor& model, const DataMatrix& background,
                    std::span<const double> instance, std::size_t feature);
double ExactCoalitionShapley(const Predictor& model, const DataMatrix& background,
                             std::span<const double> instance,
                             std::span<const std::size_t> coalition);

// "name" or "a+b" for coalitions.
std::string TargetLabel(const ShapleyEstimate& estimate, const std::vector<std::string>& names);

// CSV: instance_id,target,mode,value,std_error,M,seed
void WriteEstimateHeader(std::ostream& out);
void WriteEstimateRow(std::ostream& out, std::size_t instance_id, std::string_view target,
                      const ShapleyEstimate& estimate, std::uint64_t seed);

// Fixed-order pairwise sum.
double PairwiseSum(std::span<const double> values);

}  // namespace mccshap

#endif  // MCCSHAP_SHAPLEY_HPP_
