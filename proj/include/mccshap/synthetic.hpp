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

// Seeded synthetic regression data with controlled correlation structure.

#ifndef MCCSHAP_SYNTHETIC_HPP_
#define MCCSHAP_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mccshap/dataset.hpp"

namespace mccshap {

// Gaussian features in `features` get the requested pairwise correlations.
// `correlations` is either one value applied to every pair or the upper
// triangle in row-major order (s (s - 1) / 2 values).
struct CorrelationBlock {
  std::vector<std::size_t> features;
  std::vector<double> correlations;
};

enum class TargetShape {
  kLinear,   // sum_k w_k x_k
  kStepMix,  // sum_k w_k clamp(round(x_k), -2, 2), a staircase trees fit well
};

struct SyntheticSpec {
  std::size_t rows = 500;
  std::size_t features = 5;
  std::vector<CorrelationBlock> blocks;
  TargetShape shape = TargetShape::kLinear;
  // One weight per feature; missing trailing weights are 0.
  std::vector<double> weights;
  double intercept = 0.0;
  double noise_sd = 0.5;
  std::uint64_t seed = 42;
  // Whiten the base draws so the sample correlations equal the requested ones
  // (zero outside blocks) up to rounding. Needs rows > features.
  bool exact_moments = false;
  // Column names; defaults to x0, x1, ...
  std::vector<std::string> names;
  std::string target_name = "y";
};

// Returns the feature columns followed by the target column. Throws
// kInfeasibleCorrelation when a block's correlation matrix is not positive
// definite.
DataMatrix GenerateSynthetic(const SyntheticSpec& spec);

// Named data sets used by the experiment harness and the CLI `synth` command.
//   independent  - 5 independent features, linear target
//   scenario1    - "misc" is uncorrelated with everything else
//   scenario2    - "first_floor" has corr 0.8 with "basement" and moderate
//                  corr with two further features
//   combination  - two near-uncorrelated features "misc" and "porch" plus a
//                  correlated pair "first_floor"/"second_floor"
//   wide         - `width` features, first five correlated, for timing
SyntheticSpec SyntheticPreset(std::string_view name, std::size_t rows, std::uint64_t seed,
                              std::size_t width = 10);

std::vector<std::string> SyntheticPresetNames();

}  // namespace mccshap

#endif  // MCCSHAP_SYNTHETIC_HPP_
