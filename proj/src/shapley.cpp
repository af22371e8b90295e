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

#include "mccshap/shapley.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "mccshap/random.hpp"

namespace mccshap {
namespace {

constexpr std::int64_t kChunkIterations = 128;

std::vector<std::size_t> ValidateCoalition(std::span<const std::size_t> coalition,
                                           std::size_t width) {
  if (coalition.empty()) {
    throw Error(ErrorCode::kEmptyCoalition, "coalition has no members");
  }
  std::set<std::size_t> seen;
  for (std::size_t j : coalition) {
    if (j >= width) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature index " + std::to_string(j) + " out of range");
    }
    if (!seen.insert(j).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature " + std::to_string(j) + " listed twice in coalition");
    }
  }
  return {coalition.begin(), coalition.end()};
}

void ValidateWidths(const Predictor& model, const DataMatrix& background,
                    std::span<const double> instance) {
  if (model.width() != background.cols() || instance.size() != background.cols()) {
    throw Error(ErrorCode::kWidthMismatch,
                "model width " + std::to_string(model.width()) + ", background width " +
                    std::to_string(background.cols()) + " and instance width " +
                    std::to_string(instance.size()) + " must agree");
  }
}

std::uint64_t TargetKey(std::span<const std::size_t> coalition) {
  std::vector<std::size_t> sorted(coalition.begin(), coalition.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t key = LabelKey("coalition");
  for (std::size_t j : sorted) key = MixKeys(key, j);
  return key;
}

// Per-feature adjustment coefficients laid out for the sampling loop.
struct Correction {
  std::vector<std::size_t> features;
  RowMatrix coefficients;  // row r for features[r]
};

class MarginalSampler {
 public:
  MarginalSampler(const Predictor& model, const DataMatrix& background,
                  std::span<const double> instance, std::vector<std::size_t> coalition,
                  std::optional<Correction> correction, std::uint64_t stream_key)
      : model_(model),
        background_(background.values()),
        instance_(instance),
        coalition_(std::move(coalition)),
        correction_(std::move(correction)),
        stream_key_(stream_key) {
    const std::size_t m = background.cols();
    std::vector<bool> in_coalition(m, false);
    for (std::size_t j : coalition_) in_coalition[j] = true;
    for (std::size_t k = 0; k < m; ++k) {
      if (!in_coalition[k]) others_.push_back(k);
    }
  }

  // Fills marginals[t - first] for t in [first, last).
  void Run(std::int64_t first, std::int64_t last, std::span<double> marginals) const {
    const std::size_t m = instance_.size();
    const std::size_t players = others_.size() + 1;
    const std::size_t block = others_.size();
    const auto rows = static_cast<Eigen::Index>(2 * (last - first));
    RowMatrix batch(rows, static_cast<Eigen::Index>(m));
    std::vector<std::size_t> order(players);
    std::vector<bool> from_instance(m);
    const std::size_t q = coalition_.size();
    std::vector<double> delta(q);

    for (std::int64_t t = first; t < last; ++t) {
      CounterStream rng(MixKeys(stream_key_, static_cast<std::uint64_t>(t)));
      const std::size_t donor_index = rng.UniformIndex(static_cast<std::size_t>(background_.rows()));
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.Shuffle(std::span<std::size_t>(order));

      std::fill(from_instance.begin(), from_instance.end(), false);
      for (std::size_t p : order) {
        if (p == block) break;
        from_instance[others_[p]] = true;
      }

      const auto plus_row = static_cast<Eigen::Index>(2 * (t - first));
      double* plus = batch.row(plus_row).data();
      double* minus = batch.row(plus_row + 1).data();
      const double* donor = background_.row(static_cast<Eigen::Index>(donor_index)).data();
      for (std::size_t k = 0; k < m; ++k) {
        const double v = from_instance[k] ? instance_[k] : donor[k];
        plus[k] = v;
        minus[k] = v;
      }
      for (std::size_t j : coalition_) {
        plus[j] = instance_[j];
        minus[j] = donor[j];
      }

      if (correction_) {
        for (std::size_t s = 0; s < q; ++s) delta[s] = instance_[coalition_[s]] - donor[coalition_[s]];
        const auto& features = correction_->features;
        for (std::size_t r = 0; r < features.size(); ++r) {
          const double* a = correction_->coefficients.row(static_cast<Eigen::Index>(r)).data();
          double shift = 0.0;
          for (std::size_t s = 0; s < q; ++s) shift += a[s] * delta[s];
          if (shift == 0.0) continue;
          const std::size_t k = features[r];
          if (from_instance[k]) {
            minus[k] += shift;
          } else {
            plus[k] -= shift;
          }
        }
      }
    }

    std::vector<double> out(static_cast<std::size_t>(rows));
    model_.PredictBatch(batch, out);
    for (std::int64_t t = first; t < last; ++t) {
      const auto i = static_cast<std::size_t>(2 * (t - first));
      marginals[static_cast<std::size_t>(t - first)] = out[i] - out[i + 1];
    }
  }

 private:
  const Predictor& model_;
  const RowMatrix& background_;
  std::span<const double> instance_;
  std::vector<std::size_t> coalition_;
  std::vector<std::size_t> others_;
  std::optional<Correction> correction_;
  std::uint64_t stream_key_;
};

ShapleyEstimate Estimate(const Predictor& model, const EstimatorConfig& config,
                         std::span<const double> instance, std::span<const std::size_t> coalition) {
  if (!config.background) {
    throw Error(ErrorCode::kInvalidArgument, "estimator config has no background data");
  }
  if (config.iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  }
  const DataMatrix& background = config.background->data();
  ValidateWidths(model, background, instance);
  for (double v : instance) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "instance has a non-finite value");
  }
  std::vector<std::size_t> members = ValidateCoalition(coalition, background.cols());

  std::optional<Correction> correction;
  if (config.mode == Mode::kMcc) {
    for (std::size_t j : members) {
      if (!background.is_numeric(j)) {
        throw Error(ErrorCode::kNonNumericFeature,
                    "MCC needs numeric coalition features; '" + background.names()[j] +
                        "' is categorical (use NMCC)");
      }
    }
    const CoalitionSpec spec(members, config.background->covariance());
    AdjustmentPlan plan = BuildPlan(config.background->covariance(), background, spec);
    if (!plan.all_zero()) {
      correction = Correction{std::move(plan.adjustable), std::move(plan.coefficients)};
    }
  }

  const MarginalSampler sampler(model, background, instance, members, std::move(correction),
                                MixKeys(config.seed, TargetKey(members)));
  const std::int64_t total = config.iterations;
  std::vector<double> marginals(static_cast<std::size_t>(total));
  const std::int64_t chunks = (total + kChunkIterations - 1) / kChunkIterations;
  const auto run_chunk = [&](std::int64_t c) {
    const std::int64_t first = c * kChunkIterations;
    const std::int64_t last = std::min(total, first + kChunkIterations);
    sampler.Run(first, last,
                std::span<double>(marginals).subspan(static_cast<std::size_t>(first),
                                                     static_cast<std::size_t>(last - first)));
  };
  const auto workers = std::clamp<std::int64_t>(config.workers, 1, chunks);
  if (workers == 1) {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> pool;
      for (std::int64_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          try {
            for (std::int64_t c = next++; c < chunks && !failed; c = next++) run_chunk(c);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  const double count = static_cast<double>(total);
  const double mean = PairwiseSum(marginals) / count;
  double std_error = 0.0;
  if (total > 1) {
    std::vector<double> squares(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      const double d = marginals[i] - mean;
      squares[i] = d * d;
    }
    const double variance = PairwiseSum(squares) / (count - 1.0);
    std_error = std::sqrt(variance / count);
  }
  return ShapleyEstimate{mean, std_error, total, std::move(members), config.mode};
}

}  // namespace

std::string_view ModeName(Mode mode) { return mode == Mode::kMcc ? "MCC" : "NMCC"; }

Background::Background(DataMatrix data)
    : data_(std::move(data)), covariance_(ComputeCovariance(data_)) {}

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.subspan(0, half)) + PairwiseSum(values.subspan(half));
}

ShapleyEstimate EstimateSingle(const Predictor& model, const EstimatorConfig& config,
                               std::span<const double> instance, std::size_t feature) {
  const std::size_t coalition[1] = {feature};
  return Estimate(model, config, instance, coalition);
}

ShapleyEstimate EstimateCoalition(const Predictor& model, const EstimatorConfig& config,
                                  std::span<const double> instance,
                                  std::span<const std::size_t> coalition) {
  return Estimate(model, config, instance, coalition);
}

std::vector<FeatureOutcome> EstimateAll(const Predictor& model, const EstimatorConfig& config,
                                        std::span<const double> instance) {
  if (!config.background) {
    throw Error(ErrorCode::kInvalidArgument, "estimator config has no background data");
  }
  std::vector<FeatureOutcome> outcomes;
  for (std::size_t j = 0; j < config.background->data().cols(); ++j) {
    FeatureOutcome outcome;
    outcome.feature = j;
    try {
      outcome.estimate = EstimateSingle(model, config, instance, j);
    } catch (const Error& e) {
      outcome.error = e.code();
      outcome.message = e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

double ExactCoalitionShapley(const Predictor& model, const DataMatrix& background,
                             std::span<const double> instance,
                             std::span<const std::size_t> coalition) {
  ValidateWidths(model, background, instance);
  const std::size_t m = background.cols();
  if (m > kExactMaxFeatures) {
    throw Error(ErrorCode::kTooManyFeatures, "exact enumeration supports at most " +
                                                 std::to_string(kExactMaxFeatures) + " features");
  }
  if (background.rows() > kExactMaxBackgroundRows) {
    throw Error(ErrorCode::kInvalidArgument,
                "exact enumeration supports at most " +
                    std::to_string(kExactMaxBackgroundRows) + " background rows");
  }
  const std::vector<std::size_t> members = ValidateCoalition(coalition, m);
  std::vector<bool> in_coalition(m, false);
  for (std::size_t j : members) in_coalition[j] = true;
  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < m; ++k) {
    if (!in_coalition[k]) others.push_back(k);
  }
  const std::size_t players = others.size() + 1;
  const auto n = static_cast<Eigen::Index>(background.rows());

  // weight(s) = s! (P - s - 1)! / P!
  std::vector<double> weight(players);
  for (std::size_t s = 0; s < players; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(players - s)) -
                         std::lgamma(static_cast<double>(players) + 1.0));
  }

  RowMatrix with(n, static_cast<Eigen::Index>(m));
  RowMatrix without(n, static_cast<Eigen::Index>(m));
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << others.size()); ++mask) {
    without = background.values();
    for (std::size_t p = 0; p < others.size(); ++p) {
      if (mask & (std::uint64_t{1} << p)) {
        without.col(static_cast<Eigen::Index>(others[p])).setConstant(instance[others[p]]);
      }
    }
    with = without;
    for (std::size_t j : members) with.col(static_cast<Eigen::Index>(j)).setConstant(instance[j]);
    const double gain = model.Predict(with).mean() - model.Predict(without).mean();
    total += weight[static_cast<std::size_t>(std::popcount(mask))] * gain;
  }
  return total;
}

double ExactShapley(const Predictor& model, const DataMatrix& background,
                    std::span<const double> instance, std::size_t feature) {
  const std::size_t coalition[1] = {feature};
  return ExactCoalitionShapley(model, background, instance, coalition);
}

std::string TargetLabel(const ShapleyEstimate& estimate, const std::vector<std::string>& names) {
  std::string label;
  for (std::size_t i = 0; i < estimate.target.size(); ++i) {
    if (i > 0) label += '+';
    label += names.at(estimate.target[i]);
  }
  return label;
}

void WriteEstimateHeader(std::ostream& out) {
  out << "instance_id,target,mode,value,std_error,M,seed\n";
}

void WriteEstimateRow(std::ostream& out, std::size_t instance_id, std::string_view target,
                      const ShapleyEstimate& estimate, std::uint64_t seed) {
  out << instance_id << ',' << target << ',' << ModeName(estimate.mode) << ','
      << FormatDouble(estimate.value) << ',' << FormatDouble(estimate.std_error) << ','
      << estimate.iterations << ',' << seed << '\n';
}

}  // namespace mccshap
