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

// Tabular data, feature metadata and covariance statistics.

#ifndef MCCSHAP_DATASET_HPP_
#define MCCSHAP_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mccshap {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind { kNumeric, kEncodedCategorical };

// Immutable n x m table of finite values. Each row is an observation.
//
// Invariants: n >= 2, m >= 1, unique column names, every value finite, and
// encoded-categorical columns hold integer level codes only.
class DataMatrix {
 public:
  DataMatrix(RowMatrix values, std::vector<std::string> names,
             std::vector<FeatureKind> kinds);
  // All columns numeric.
  DataMatrix(RowMatrix values, std::vector<std::string> names);

  const RowMatrix& values() const { return values_; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<FeatureKind>& kinds() const { return kinds_; }
  FeatureKind kind(std::size_t j) const { return kinds_.at(j); }
  bool is_numeric(std::size_t j) const { return kinds_.at(j) == FeatureKind::kNumeric; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }
  Eigen::VectorXd column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws kUnknownFeature, listing the available names.
  std::size_t index_of(std::string_view name) const;

  DataMatrix without_columns(std::span<const std::size_t> columns) const;
  DataMatrix with_column(std::string name, FeatureKind kind, const Eigen::VectorXd& values) const;
  DataMatrix head(std::size_t count) const;

  // Content hash over names, kinds and value bits (FNV-1a, 64 bit).
  std::uint64_t fingerprint() const;

 private:
  RowMatrix values_;
  std::vector<std::string> names_;
  std::vector<FeatureKind> kinds_;
};

struct CsvSchema {
  // Columns to mark as already-encoded categorical.
  std::vector<std::string> categorical;
};

struct CsvLoad {
  DataMatrix data;
  std::size_t dropped_rows = 0;
};

// Header row is mandatory. Rows with a missing or unparseable cell are
// dropped and counted.
CsvLoad LoadCsv(const std::filesystem::path& path, const CsvSchema& schema = {});
CsvLoad ParseCsv(std::istream& in, const CsvSchema& schema = {});
void WriteCsv(const DataMatrix& data, std::ostream& out);

// Shortest decimal string that round-trips to the same double.
std::string FormatDouble(double value);

// Means and sample covariance (denominator n - 1) of the numeric columns.
// Entries touching a non-numeric column are unusable: the checked accessors
// throw kNonNumericFeature and the raw matrix stores NaN there.
class CovarianceCache {
 public:
  CovarianceCache(Eigen::VectorXd means, Eigen::MatrixXd cov, std::vector<bool> numeric);

  std::size_t size() const { return numeric_.size(); }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::MatrixXd& matrix() const { return cov_; }
  bool is_numeric(std::size_t j) const { return numeric_.at(j); }
  const std::vector<bool>& numeric_mask() const { return numeric_; }

  double cov(std::size_t j, std::size_t k) const;
  double variance(std::size_t j) const { return cov(j, j); }
  // Mean of the numeric-column variances; scale for degeneracy thresholds.
  double mean_numeric_variance() const { return mean_variance_; }

 private:
  Eigen::VectorXd means_;
  Eigen::MatrixXd cov_;
  std::vector<bool> numeric_;
  double mean_variance_ = 0.0;
};

CovarianceCache ComputeCovariance(const DataMatrix& data);

// Appends "<name>_corr" = column j + Normal(0, noise_sd^2) noise.
DataMatrix InjectCorrelatedClone(const DataMatrix& data, std::size_t j, double noise_sd,
                                 std::uint64_t seed);

struct TargetSplit {
  DataMatrix features;
  Eigen::VectorXd target;
};

TargetSplit SplitTarget(const DataMatrix& data, std::string_view target);

double Correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace mccshap

#endif  // MCCSHAP_DATASET_HPP_
