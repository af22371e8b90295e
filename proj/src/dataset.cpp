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

#include "mccshap/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "mccshap/error.hpp"

namespace mccshap {
namespace {

std::string JoinNames(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV line. Double-quoted fields may contain commas; "" is an
// escaped quote.
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(Trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.emplace_back(Trim(current));
  return fields;
}

std::optional<double> ParseCell(std::string_view cell) {
  cell = Trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

void ValidateShape(const RowMatrix& values, const std::vector<std::string>& names,
                   const std::vector<FeatureKind>& kinds) {
  if (values.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "a data matrix needs at least one column");
  }
  if (values.rows() < 2) {
    throw Error(ErrorCode::kTooFewRows,
                "a data matrix needs at least 2 rows, got " + std::to_string(values.rows()));
  }
  if (names.size() != static_cast<std::size_t>(values.cols()) || kinds.size() != names.size()) {
    throw Error(ErrorCode::kWidthMismatch, "column metadata does not match the value width");
  }
  std::set<std::string_view> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kDuplicateColumnName, "duplicate column name '" + name + "'");
    }
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "data matrix contains a non-finite value");
  }
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    if (kinds[j] != FeatureKind::kEncodedCategorical) continue;
    const auto col = values.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (col[i] != std::round(col[i])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "categorical column '" + names[j] + "' holds a non-integer level code");
      }
    }
  }
}

}  // namespace

DataMatrix::DataMatrix(RowMatrix values, std::vector<std::string> names,
                       std::vector<FeatureKind> kinds)
    : values_(std::move(values)), names_(std::move(names)), kinds_(std::move(kinds)) {
  ValidateShape(values_, names_, kinds_);
}

DataMatrix::DataMatrix(RowMatrix values, std::vector<std::string> names)
    : DataMatrix(std::move(values), names,
                 std::vector<FeatureKind>(names.size(), FeatureKind::kNumeric)) {}

std::optional<std::size_t> DataMatrix::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t DataMatrix::index_of(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw Error(ErrorCode::kUnknownFeature, "unknown feature '" + std::string(name) +
                                              "'; available: " + JoinNames(names_));
}

DataMatrix DataMatrix::without_columns(std::span<const std::size_t> columns) const {
  std::vector<bool> drop(cols(), false);
  for (std::size_t c : columns) drop.at(c) = true;
  std::vector<Eigen::Index> keep;
  std::vector<std::string> names;
  std::vector<FeatureKind> kinds;
  for (std::size_t j = 0; j < cols(); ++j) {
    if (drop[j]) continue;
    keep.push_back(static_cast<Eigen::Index>(j));
    names.push_back(names_[j]);
    kinds.push_back(kinds_[j]);
  }
  RowMatrix values(values_.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    values.col(static_cast<Eigen::Index>(c)) = values_.col(keep[c]);
  }
  return DataMatrix(std::move(values), std::move(names), std::move(kinds));
}

DataMatrix DataMatrix::with_column(std::string name, FeatureKind kind,
                                   const Eigen::VectorXd& values) const {
  if (values.size() != values_.rows()) {
    throw Error(ErrorCode::kWidthMismatch, "appended column has the wrong length");
  }
  RowMatrix out(values_.rows(), values_.cols() + 1);
  out.leftCols(values_.cols()) = values_;
  out.col(values_.cols()) = values;
  auto names = names_;
  auto kinds = kinds_;
  names.push_back(std::move(name));
  kinds.push_back(kind);
  return DataMatrix(std::move(out), std::move(names), std::move(kinds));
}

DataMatrix DataMatrix::head(std::size_t count) const {
  count = std::min(count, rows());
  return DataMatrix(values_.topRows(static_cast<Eigen::Index>(count)), names_, kinds_);
}

std::uint64_t DataMatrix::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {rows(), cols()};
  feed(dims, sizeof(dims));
  for (std::size_t j = 0; j < cols(); ++j) {
    feed(names_[j].data(), names_[j].size());
    const unsigned char sep = kinds_[j] == FeatureKind::kNumeric ? 0 : 1;
    feed(&sep, 1);
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    // Canonical zero so that -0.0 and 0.0 hash alike.
    const double v = values_.data()[i] == 0.0 ? 0.0 : values_.data()[i];
    const auto bits = std::bit_cast<std::uint64_t>(v);
    feed(&bits, sizeof(bits));
  }
  return h;
}

CsvLoad ParseCsv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kNoUsableRows, "input has no header row");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> names = SplitCsvLine(line);
  {
    std::set<std::string_view> seen;
    for (const auto& name : names) {
      if (!seen.insert(name).second) {
        throw Error(ErrorCode::kDuplicateColumnName, "duplicate column name '" + name + "'");
      }
    }
  }
  std::vector<FeatureKind> kinds(names.size(), FeatureKind::kNumeric);
  for (const auto& cat : schema.categorical) {
    const auto it = std::find(names.begin(), names.end(), cat);
    if (it == names.end()) {
      throw Error(ErrorCode::kUnknownFeature, "categorical override names unknown column '" +
                                                  cat + "'; available: " + JoinNames(names));
    }
    kinds[static_cast<std::size_t>(it - names.begin())] = FeatureKind::kEncodedCategorical;
  }

  std::vector<double> cells;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::vector<double> row(names.size());
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsvLine(line);
    bool ok = fields.size() == names.size();
    for (std::size_t j = 0; ok && j < fields.size(); ++j) {
      const auto value = ParseCell(fields[j]);
      if (!value || (kinds[j] == FeatureKind::kEncodedCategorical && *value != std::round(*value))) {
        ok = false;
      } else {
        row[j] = *value;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    cells.insert(cells.end(), row.begin(), row.end());
    ++kept;
  }
  if (kept == 0) {
    throw Error(ErrorCode::kNoUsableRows,
                "every data row was dropped (" + std::to_string(dropped) + " rows)");
  }
  RowMatrix values = Eigen::Map<const RowMatrix>(cells.data(), static_cast<Eigen::Index>(kept),
                                                 static_cast<Eigen::Index>(names.size()));
  return CsvLoad{DataMatrix(std::move(values), std::move(names), std::move(kinds)), dropped};
}

CsvLoad LoadCsv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kFileUnreadable, "cannot read '" + path.string() + "'");
  }
  return ParseCsv(in, schema);
}

std::string FormatDouble(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void WriteCsv(const DataMatrix& data, std::ostream& out) {
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (j > 0) out << ',';
    out << data.names()[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << FormatDouble(row[j]);
    }
    out << '\n';
  }
}

CovarianceCache::CovarianceCache(Eigen::VectorXd means, Eigen::MatrixXd cov,
                                 std::vector<bool> numeric)
    : means_(std::move(means)), cov_(std::move(cov)), numeric_(std::move(numeric)) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < numeric_.size(); ++j) {
    if (!numeric_[j]) continue;
    total += cov_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    ++count;
  }
  mean_variance_ = count > 0 ? total / static_cast<double>(count) : 0.0;
}

double CovarianceCache::cov(std::size_t j, std::size_t k) const {
  if (j >= size() || k >= size()) {
    throw Error(ErrorCode::kInvalidArgument, "covariance index out of range");
  }
  if (!numeric_[j] || !numeric_[k]) {
    throw Error(ErrorCode::kNonNumericFeature,
                "covariance requested for a non-numeric feature (index " +
                    std::to_string(numeric_[j] ? k : j) + ")");
  }
  return cov_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
}

CovarianceCache ComputeCovariance(const DataMatrix& data) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  if (n < 2) {
    throw Error(ErrorCode::kTooFewRows, "covariance needs at least 2 rows");
  }
  std::vector<bool> numeric(data.cols());
  std::vector<Eigen::Index> numeric_cols;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    numeric[j] = data.is_numeric(j);
    if (numeric[j]) numeric_cols.push_back(static_cast<Eigen::Index>(j));
  }
  const Eigen::VectorXd means = data.values().colwise().mean().transpose();
  const auto p = static_cast<Eigen::Index>(numeric_cols.size());

  // Two-pass: center first, then accumulate the lower triangle of X^T X.
  Eigen::MatrixXd centered(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    centered.col(c) = data.values().col(numeric_cols[c]).array() - means[numeric_cols[c]];
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  gram /= static_cast<double>(n - 1);

  const auto m = static_cast<Eigen::Index>(data.cols());
  Eigen::MatrixXd cov =
      Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = gram(a, b);
      cov(numeric_cols[a], numeric_cols[b]) = v;
      cov(numeric_cols[b], numeric_cols[a]) = v;
    }
  }
  return CovarianceCache(means, std::move(cov), std::move(numeric));
}

DataMatrix InjectCorrelatedClone(const DataMatrix& data, std::size_t j, double noise_sd,
                                 std::uint64_t seed) {
  if (j >= data.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "clone source index out of range");
  }
  if (!data.is_numeric(j)) {
    throw Error(ErrorCode::kNonNumericFeature,
                "cannot clone non-numeric feature '" + data.names()[j] + "'");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sd must be finite and >= 0");
  }
  Eigen::VectorXd clone = data.column(j);
  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (Eigen::Index i = 0; i < clone.size(); ++i) clone[i] += noise(rng);
  }
  return data.with_column(data.names()[j] + "_corr", FeatureKind::kNumeric, clone);
}

TargetSplit SplitTarget(const DataMatrix& data, std::string_view target) {
  const std::size_t t = data.index_of(target);
  if (data.cols() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "no feature columns besides the target");
  }
  const std::size_t drop[1] = {t};
  return TargetSplit{data.without_columns(drop), data.column(t)};
}

double Correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  const double denom = std::sqrt((ca * ca).sum() * (cb * cb).sum());
  return denom > 0.0 ? (ca * cb).sum() / denom : 0.0;
}

}  // namespace mccshap
