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

// Experiment runners: clone injection, correlated-set removal, coalition
// comparison and MCC/NMCC timing. Each arm refits its models.

#ifndef MCCSHAP_HARNESS_HPP_
#define MCCSHAP_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccshap/dataset.hpp"
#include "mccshap/models.hpp"
#include "mccshap/shapley.hpp"

namespace mccshap {

struct EstimateRow {
  std::string condition;
  std::string model;
  std::string target;
  Mode mode = Mode::kNmcc;
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
};

enum class DerivedKind {
  kRatio,       // rows[terms[0]] / rows[terms[1]]
  kDifference,  // rows[terms[0]] - sum of rows[terms[1..]]
};

// A quantity recomputable from the report's own estimate rows.
struct DerivedRow {
  std::string name;
  std::string model;
  std::string target;
  DerivedKind kind = DerivedKind::kRatio;
  std::vector<std::size_t> terms;
  double value = 0.0;
  // First-order propagation of the estimate standard errors.
  double std_error = 0.0;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<EstimateRow> rows;
  std::vector<DerivedRow> derived;
  std::uint64_t seed = 0;
  std::int64_t iterations = 0;
  std::uint64_t fingerprint = 0;
  std::size_t instance = 0;
  std::vector<std::string> notes;

  // Throws kInvalidArgument when absent.
  const EstimateRow& row(std::string_view condition, std::string_view model,
                         std::string_view target, Mode mode) const;
  const DerivedRow& derived_row(std::string_view name, std::string_view model,
                                std::string_view target) const;
};

// Recomputes a derived row from `rows`.
double EvaluateDerived(const DerivedRow& derived, std::span<const EstimateRow> rows);

struct ScenarioOptions {
  std::int64_t iterations = 10000;
  std::uint64_t seed = 42;
  // Row explained; defaults to the row whose value of the studied feature is
  // closest to its 90th percentile.
  std::optional<std::size_t> instance;
  // Clone noise standard deviation as a fraction of the feature's sd.
  double clone_noise_ratio = 0.01;
  int workers = 1;
};

struct NamedModel {
  std::string name;
  ModelSpec spec;
};

// Arms: without the clone (NMCC, MCC of j) and with "<j>_corr" appended and
// every model refit (NMCC, MCC of j and of the clone). Derived rows:
// halving = NMCC_with / NMCC_without, restoration = MCC_with / NMCC_without,
// mcc_over_nmcc = MCC_without / NMCC_without.
ScenarioReport RunScenario1(const DataMatrix& data, std::string_view target,
                            std::string_view feature, std::span<const NamedModel> models,
                            const ScenarioOptions& options);

// Arms: models fitted without the correlated set (NMCC, MCC of j) and with all
// features (NMCC, MCC of j). Derived rows: reduction = NMCC_all / NMCC_without,
// recovery = MCC_all / MCC_without, mcc_over_nmcc for each arm.
ScenarioReport RunScenario2(const DataMatrix& data, std::string_view target,
                            std::string_view feature, std::span<const std::string> correlated,
                            std::span<const NamedModel> models, const ScenarioOptions& options);

// Coalition NMCC and MCC plus the members' individual values. With
// `paired_clones`, every member gets a clone and the coalition of clones is
// compared against the clone-free baseline (halving, restoration); otherwise
// the derived rows are mcc_over_nmcc and the non-additivity gap
// MCC_coalition - sum of individual MCC values.
ScenarioReport RunCombination(const DataMatrix& data, std::string_view target,
                              std::span<const std::string> coalition,
                              std::span<const NamedModel> models, bool paired_clones,
                              const ScenarioOptions& options);

// CSV columns: scenario,condition,model,target,mode,value,std_error,M,seed.
// Derived rows use the derived name as condition and ratio|difference as mode.
void WriteReportCsv(const ScenarioReport& report, std::ostream& out);
void WriteReportMarkdown(const ScenarioReport& report, std::ostream& out);

struct TimingOptions {
  std::vector<std::size_t> widths = {10, 100, 1000};
  std::size_t rows = 500;
  std::int64_t iterations = 10000;
  std::uint64_t seed = 42;
  int repeats = 5;
  // Feature explained at every width.
  std::size_t feature = 0;
};

struct TimingRow {
  std::size_t width = 0;
  double nmcc_median = 0.0;
  double nmcc_spread = 0.0;  // max - min over repeats, seconds
  double mcc_median = 0.0;
  double mcc_spread = 0.0;
  double ratio = 0.0;  // mcc_median / nmcc_median
  double nmcc_value = 0.0;
  double mcc_value = 0.0;
};

struct TimingReport {
  std::string model;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
  int repeats = 0;
  std::vector<TimingRow> rows;
};

// Times single-feature NMCC and MCC estimation on the "wide" synthetic preset,
// one worker, repeats interleaved. Every timed estimate is compared with an
// untimed reference run at the same seed; a mismatch throws kInvalidArgument.
// A forest spec with max_features = 0 uses a third of the width per split.
TimingReport RunTiming(const ModelSpec& spec, const TimingOptions& options);

void WriteTimingCsv(const TimingReport& report, std::ostream& out);
void WriteTimingMarkdown(const TimingReport& report, std::ostream& out);

// Index of the row whose column value is nearest the q-quantile (lowest index
// on ties).
std::size_t QuantileRow(const DataMatrix& data, std::size_t column, double q);

}  // namespace mccshap

#endif  // MCCSHAP_HARNESS_HPP_
