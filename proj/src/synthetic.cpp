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

#include "mccshap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mccshap/error.hpp"

namespace mccshap {
namespace {

constexpr std::size_t kMinSyntheticRows = 50;

Eigen::MatrixXd BlockCorrelation(const CorrelationBlock& block) {
  const auto s = static_cast<Eigen::Index>(block.features.size());
  const std::size_t pairs = block.features.size() * (block.features.size() - 1) / 2;
  if (block.correlations.size() != 1 && block.correlations.size() != pairs) {
    throw Error(ErrorCode::kInvalidArgument,
                "a correlation block of " + std::to_string(s) + " features needs 1 or " +
                    std::to_string(pairs) + " correlations");
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(s, s);
  std::size_t next = 0;
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i + 1; j < s; ++j) {
      const double rho =
          block.correlations.size() == 1 ? block.correlations[0] : block.correlations[next++];
      if (!(std::abs(rho) < 1.0)) {
        throw Error(ErrorCode::kInfeasibleCorrelation,
                    "correlation " + std::to_string(rho) + " is outside (-1, 1)");
      }
      r(i, j) = rho;
      r(j, i) = rho;
    }
  }
  return r;
}

double Staircase(double x) { return std::clamp(std::round(x), -2.0, 2.0); }

}  // namespace

DataMatrix GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.rows < kMinSyntheticRows) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic data needs at least " + std::to_string(kMinSyntheticRows) + " rows");
  }
  if (spec.features == 0) throw Error(ErrorCode::kInvalidArgument, "no features requested");
  if (spec.weights.size() > spec.features) {
    throw Error(ErrorCode::kInvalidArgument, "more weights than features");
  }
  if (!spec.names.empty() && spec.names.size() != spec.features) {
    throw Error(ErrorCode::kInvalidArgument, "names must match the feature count");
  }
  if (!(spec.noise_sd >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sd must be >= 0");

  const auto m = static_cast<Eigen::Index>(spec.features);
  const auto n = static_cast<Eigen::Index>(spec.rows);

  // Factor every block before drawing so infeasible input fails fast.
  std::vector<bool> claimed(spec.features, false);
  std::vector<Eigen::MatrixXd> factors;
  for (const CorrelationBlock& block : spec.blocks) {
    if (block.features.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, "a correlation block needs two or more features");
    }
    for (std::size_t f : block.features) {
      if (f >= spec.features) throw Error(ErrorCode::kInvalidArgument, "block feature out of range");
      if (claimed[f]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "feature " + std::to_string(f) + " appears in more than one block");
      }
      claimed[f] = true;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(BlockCorrelation(block));
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kInfeasibleCorrelation,
                  "requested correlations do not form a positive definite matrix");
    }
    factors.push_back(llt.matrixL());
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  RowMatrix values(n, m + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) values(i, j) = normal(rng);
  }
  if (spec.exact_moments) {
    if (spec.rows <= spec.features) {
      throw Error(ErrorCode::kInvalidArgument, "exact moments need more rows than features");
    }
    auto z = values.leftCols(m);
    z.rowwise() -= z.colwise().mean();
    const Eigen::MatrixXd gram = (z.transpose() * z) / static_cast<double>(n - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    // z <- z L^-T, so z^T z / (n - 1) = I.
    z = llt.matrixL().solve(z.transpose()).transpose();
  }
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& features = spec.blocks[b].features;
    const auto s = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd z(n, s);
    for (Eigen::Index c = 0; c < s; ++c) z.col(c) = values.col(static_cast<Eigen::Index>(features[c]));
    const Eigen::MatrixXd mixed = z * factors[b].transpose();
    for (Eigen::Index c = 0; c < s; ++c) {
      values.col(static_cast<Eigen::Index>(features[c])) = mixed.col(c);
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    double y = spec.intercept;
    for (std::size_t k = 0; k < spec.weights.size(); ++k) {
      const double x = values(i, static_cast<Eigen::Index>(k));
      y += spec.weights[k] * (spec.shape == TargetShape::kLinear ? x : Staircase(x));
    }
    values(i, m) = y + spec.noise_sd * normal(rng);
  }

  std::vector<std::string> names = spec.names;
  if (names.empty()) {
    for (std::size_t k = 0; k < spec.features; ++k) names.push_back("x" + std::to_string(k));
  }
  names.push_back(spec.target_name);
  return DataMatrix(std::move(values), std::move(names));
}

SyntheticSpec SyntheticPreset(std::string_view name, std::size_t rows, std::uint64_t seed,
                              std::size_t width) {
  SyntheticSpec spec;
  spec.rows = rows;
  spec.seed = seed;
  if (name == "independent") {
    spec.exact_moments = true;
    spec.features = 5;
    spec.weights = {3.0, -2.0, 1.0, 0.5, 0.0};
  } else if (name == "scenario1") {
    spec.exact_moments = true;
    spec.features = 5;
    spec.names = {"misc", "quality", "area", "age", "lot"};
    spec.blocks = {{{1, 2, 3}, {0.5, -0.3, -0.2}}};
    spec.weights = {2.0, 3.0, 2.0, -1.0, 0.5};
  } else if (name == "scenario2") {
    spec.exact_moments = true;
    spec.features = 6;
    spec.names = {"first_floor", "basement", "quality", "area", "misc", "lot"};
    spec.blocks = {{{0, 1, 2, 3}, {0.8, 0.4, 0.4, 0.3, 0.3, 0.3}}};
    spec.weights = {2.0, 1.5, 2.0, 1.0, 1.0, 0.5};
  } else if (name == "combination") {
    spec.exact_moments = true;
    spec.features = 6;
    spec.names = {"misc", "porch", "first_floor", "second_floor", "quality", "lot"};
    spec.blocks = {{{2, 3, 4}, {0.8, 0.3, 0.3}}};
    spec.weights = {2.0, 1.5, 2.0, 1.5, 2.0, 0.5};
  } else if (name == "wide") {
    if (width < 5) throw Error(ErrorCode::kInvalidArgument, "the wide preset needs width >= 5");
    spec.features = width;
    spec.blocks = {{{0, 1, 2, 3, 4}, {0.5}}};
    spec.weights = {2.0, 1.5, 1.0, 0.5, -1.0};
  } else {
    std::string known;
    for (const std::string& p : SyntheticPresetNames()) known += (known.empty() ? "" : ", ") + p;
    throw Error(ErrorCode::kInvalidArgument,
                "unknown synthetic preset '" + std::string(name) + "' (known: " + known + ")");
  }
  return spec;
}

std::vector<std::string> SyntheticPresetNames() {
  return {"independent", "scenario1", "scenario2", "combination", "wide"};
}

}  // namespace mccshap
