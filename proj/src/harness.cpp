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

#include "mccshap/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mccshap/error.hpp"
#include "mccshap/random.hpp"
#include "mccshap/synthetic.hpp"

namespace mccshap {
namespace {

constexpr double kDefaultInstanceQuantile = 0.9;

// One refit arm: the data the models see and the matching background.
struct Arm {
  std::string condition;
  DataMatrix data;
  std::string target;
  std::shared_ptr<const Background> background;

  Arm(std::string cond, DataMatrix d, std::string_view target_name)
      : condition(std::move(cond)), data(std::move(d)), target(target_name) {
    background = std::make_shared<const Background>(SplitTarget(data, target).features);
  }

  const DataMatrix& features() const { return background->data(); }
};

class ReportBuilder {
 public:
  ReportBuilder(std::string scenario, const DataMatrix& data, const ScenarioOptions& options,
                std::size_t instance) {
    report_.scenario = std::move(scenario);
    report_.seed = options.seed;
    report_.iterations = options.iterations;
    report_.fingerprint = data.fingerprint();
    report_.instance = instance;
    options_ = options;
  }

  std::size_t Estimate(const Arm& arm, const NamedModel& model, const Predictor& predictor,
                       std::span<const std::size_t> coalition, Mode mode) {
    EstimatorConfig config;
    config.iterations = options_.iterations;
    config.seed = options_.seed;
    config.mode = mode;
    config.background = arm.background;
    config.workers = options_.workers;
    const ShapleyEstimate est = EstimateCoalition(
        predictor, config, arm.features().row(report_.instance), coalition);
    EstimateRow row;
    row.condition = arm.condition;
    row.model = model.name;
    row.target = TargetLabel(est, arm.features().names());
    row.mode = mode;
    row.value = est.value;
    row.std_error = est.std_error;
    row.iterations = est.iterations;
    row.seed = options_.seed;
    report_.rows.push_back(std::move(row));
    return report_.rows.size() - 1;
  }

  void Derive(std::string name, DerivedKind kind, std::vector<std::size_t> terms) {
    DerivedRow d;
    d.name = std::move(name);
    d.model = report_.rows.at(terms.front()).model;
    d.target = report_.rows.at(terms.front()).target;
    d.kind = kind;
    d.terms = std::move(terms);
    d.value = EvaluateDerived(d, report_.rows);
    double var = 0.0;
    if (kind == DerivedKind::kRatio) {
      const EstimateRow& a = report_.rows[d.terms[0]];
      const EstimateRow& b = report_.rows[d.terms[1]];
      const double ra = a.value != 0.0 ? a.std_error / a.value : 0.0;
      const double rb = b.value != 0.0 ? b.std_error / b.value : 0.0;
      var = d.value * d.value * (ra * ra + rb * rb);
    } else {
      for (std::size_t t : d.terms) var += report_.rows[t].std_error * report_.rows[t].std_error;
    }
    d.std_error = std::sqrt(var);
    report_.derived.push_back(std::move(d));
  }

  void Note(std::string note) { report_.notes.push_back(std::move(note)); }

  ScenarioReport Finish() { return std::move(report_); }

 private:
  ScenarioReport report_;
  ScenarioOptions options_;
};

std::size_t ResolveInstance(const DataMatrix& features, std::span<const std::size_t> columns,
                            const ScenarioOptions& options) {
  if (options.instance) {
    if (*options.instance >= features.rows()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "instance " + std::to_string(*options.instance) + " is out of range (" +
                      std::to_string(features.rows()) + " rows)");
    }
    return *options.instance;
  }
  if (columns.size() == 1) return QuantileRow(features, columns[0], kDefaultInstanceQuantile);
  // Coalitions: quantile of the members' mean z-score.
  const CovarianceCache cov = ComputeCovariance(features);
  Eigen::VectorXd composite = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.rows()));
  for (std::size_t c : columns) {
    const double sd = std::sqrt(cov.variance(c));
    if (sd > 0.0) {
      composite += (features.column(c).array() - cov.means()[static_cast<Eigen::Index>(c)])
                       .matrix() / sd;
    }
  }
  composite /= static_cast<double>(columns.size());
  const DataMatrix scores(RowMatrix(composite), {"composite"});
  return QuantileRow(scores, 0, kDefaultInstanceQuantile);
}

DataMatrix AddClone(const DataMatrix& data, std::size_t column, const ScenarioOptions& options,
                    std::size_t ordinal) {
  const double sd = std::sqrt(ComputeCovariance(data).variance(column));
  const std::uint64_t seed = MixKeys(DeriveSeed(options.seed, "clone"), ordinal);
  return InjectCorrelatedClone(data, column, options.clone_noise_ratio * sd, seed);
}

std::string CloneNote(const DataMatrix& data, std::size_t column) {
  const std::size_t clone = data.index_of(data.names()[column] + "_corr");
  std::ostringstream out;
  out << "corr(" << data.names()[column] << ", " << data.names()[clone]
      << ") = " << std::fixed << std::setprecision(6)
      << Correlation(data.column(column), data.column(clone));
  return out.str();
}

std::vector<std::size_t> Indices(const DataMatrix& features, std::span<const std::string> names) {
  std::vector<std::size_t> out;
  for (const std::string& n : names) out.push_back(features.index_of(n));
  return out;
}

std::string FormatEstimate(double value, double std_error) {
  std::ostringstream out;
  out << std::setprecision(6) << value << " ± " << std::setprecision(2) << std_error;
  return out.str();
}

}  // namespace

const EstimateRow& ScenarioReport::row(std::string_view condition, std::string_view model,
                                       std::string_view target, Mode mode) const {
  for (const EstimateRow& r : rows) {
    if (r.condition == condition && r.model == model && r.target == target && r.mode == mode) {
      return r;
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no estimate row " + std::string(condition) + "/" + std::string(model) + "/" +
                  std::string(target) + "/" + std::string(ModeName(mode)));
}

const DerivedRow& ScenarioReport::derived_row(std::string_view name, std::string_view model,
                                              std::string_view target) const {
  for (const DerivedRow& d : derived) {
    if (d.name == name && d.model == model && d.target == target) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "no derived row " + std::string(name) + "/" +
                                               std::string(model) + "/" + std::string(target));
}

double EvaluateDerived(const DerivedRow& derived, std::span<const EstimateRow> rows) {
  if (derived.terms.empty()) throw Error(ErrorCode::kInvalidArgument, "derived row has no terms");
  for (std::size_t t : derived.terms) {
    if (t >= rows.size()) throw Error(ErrorCode::kInvalidArgument, "derived term out of range");
  }
  if (derived.kind == DerivedKind::kRatio) {
    if (derived.terms.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument, "a ratio needs exactly two terms");
    }
    return rows[derived.terms[0]].value / rows[derived.terms[1]].value;
  }
  double value = rows[derived.terms[0]].value;
  for (std::size_t i = 1; i < derived.terms.size(); ++i) value -= rows[derived.terms[i]].value;
  return value;
}

std::size_t QuantileRow(const DataMatrix& data, std::size_t column, double q) {
  const Eigen::VectorXd col = data.column(column);
  std::vector<double> sorted(col.begin(), col.end());
  std::sort(sorted.begin(), sorted.end());
  // Linear interpolation between order statistics.
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double target = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  std::size_t best = 0;
  for (std::size_t i = 1; i < data.rows(); ++i) {
    if (std::abs(col[static_cast<Eigen::Index>(i)] - target) <
        std::abs(col[static_cast<Eigen::Index>(best)] - target)) {
      best = i;
    }
  }
  return best;
}

ScenarioReport RunScenario1(const DataMatrix& data, std::string_view target,
                            std::string_view feature, std::span<const NamedModel> models,
                            const ScenarioOptions& options) {
  const Arm base("without_clone", data, target);
  const std::size_t j = base.features().index_of(feature);
  const std::size_t target_j[] = {j};
  const std::size_t instance = ResolveInstance(base.features(), target_j, options);
  const DataMatrix cloned_data = AddClone(data, data.index_of(feature), options, 0);
  const Arm cloned("with_clone", cloned_data, target);
  const std::size_t clone = cloned.features().index_of(std::string(feature) + "_corr");

  ReportBuilder report("scenario1", data, options, instance);
  report.Note(CloneNote(cloned_data, cloned_data.index_of(feature)));
  const std::size_t target_clone[] = {clone};
  for (const NamedModel& model : models) {
    const PredictorHandle without = FitModel(model.spec, base.data, target);
    const std::size_t nmcc0 = report.Estimate(base, model, *without, target_j, Mode::kNmcc);
    const std::size_t mcc0 = report.Estimate(base, model, *without, target_j, Mode::kMcc);

    const PredictorHandle with = FitModel(model.spec, cloned.data, target);
    const std::size_t nmcc1 = report.Estimate(cloned, model, *with, target_j, Mode::kNmcc);
    report.Estimate(cloned, model, *with, target_clone, Mode::kNmcc);
    const std::size_t mcc1 = report.Estimate(cloned, model, *with, target_j, Mode::kMcc);
    report.Estimate(cloned, model, *with, target_clone, Mode::kMcc);

    report.Derive("halving", DerivedKind::kRatio, {nmcc1, nmcc0});
    report.Derive("restoration", DerivedKind::kRatio, {mcc1, nmcc0});
    report.Derive("mcc_over_nmcc", DerivedKind::kRatio, {mcc0, nmcc0});
  }
  report.Note("halving is expected near 0.5 and restoration near 1 when the clone is almost "
              "perfectly correlated; both bands follow the spread seen across model families");
  return report.Finish();
}

ScenarioReport RunScenario2(const DataMatrix& data, std::string_view target,
                            std::string_view feature, std::span<const std::string> correlated,
                            std::span<const NamedModel> models, const ScenarioOptions& options) {
  if (correlated.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "scenario 2 needs a non-empty correlated set");
  }
  const Arm full("all_features", data, target);
  const std::size_t j_full = full.features().index_of(feature);
  const std::vector<std::size_t> drop_full = Indices(full.features(), correlated);
  if (std::find(drop_full.begin(), drop_full.end(), j_full) != drop_full.end()) {
    throw Error(ErrorCode::kInvalidArgument, "the studied feature is in the correlated set");
  }
  std::vector<std::size_t> drop;
  for (const std::string& name : correlated) drop.push_back(data.index_of(name));
  const Arm reduced("without_correlated", data.without_columns(drop), target);
  const std::size_t j_reduced = reduced.features().index_of(feature);
  const std::size_t instance = ResolveInstance(full.features(), std::span<const std::size_t>(&j_full, 1), options);

  ReportBuilder report("scenario2", data, options, instance);
  for (std::size_t c : drop_full) {
    std::ostringstream note;
    note << "corr(" << feature << ", " << full.features().names()[c] << ") = " << std::fixed
         << std::setprecision(4)
         << Correlation(full.features().column(j_full), full.features().column(c));
    report.Note(note.str());
  }
  const std::size_t tr[] = {j_reduced};
  const std::size_t tf[] = {j_full};
  for (const NamedModel& model : models) {
    const PredictorHandle small = FitModel(model.spec, reduced.data, target);
    const std::size_t nmcc0 = report.Estimate(reduced, model, *small, tr, Mode::kNmcc);
    const std::size_t mcc0 = report.Estimate(reduced, model, *small, tr, Mode::kMcc);
    const PredictorHandle big = FitModel(model.spec, full.data, target);
    const std::size_t nmcc1 = report.Estimate(full, model, *big, tf, Mode::kNmcc);
    const std::size_t mcc1 = report.Estimate(full, model, *big, tf, Mode::kMcc);

    report.Derive("reduction", DerivedKind::kRatio, {nmcc1, nmcc0});
    report.Derive("recovery", DerivedKind::kRatio, {mcc1, mcc0});
    report.Derive("mcc_over_nmcc_without", DerivedKind::kRatio, {mcc0, nmcc0});
    report.Derive("mcc_over_nmcc_all", DerivedKind::kRatio, {mcc1, nmcc1});
  }
  report.Note("reduction is expected between 0.6 and 0.95 for a correlation near 0.8, and "
              "recovery within 20% of 1");
  return report.Finish();
}

ScenarioReport RunCombination(const DataMatrix& data, std::string_view target,
                              std::span<const std::string> coalition,
                              std::span<const NamedModel> models, bool paired_clones,
                              const ScenarioOptions& options) {
  if (coalition.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a combination needs at least two features");
  }
  const Arm base(paired_clones ? "without_clones" : "all_features", data, target);
  const std::vector<std::size_t> members = Indices(base.features(), coalition);
  const std::size_t instance = ResolveInstance(base.features(), members, options);
  ReportBuilder report("combination", data, options, instance);

  if (!paired_clones) {
    for (const NamedModel& model : models) {
      const PredictorHandle fitted = FitModel(model.spec, base.data, target);
      const std::size_t nmcc = report.Estimate(base, model, *fitted, members, Mode::kNmcc);
      const std::size_t mcc = report.Estimate(base, model, *fitted, members, Mode::kMcc);
      std::vector<std::size_t> gap = {mcc};
      for (std::size_t m : members) {
        const std::size_t single[] = {m};
        report.Estimate(base, model, *fitted, single, Mode::kNmcc);
        gap.push_back(report.Estimate(base, model, *fitted, single, Mode::kMcc));
      }
      report.Derive("mcc_over_nmcc", DerivedKind::kRatio, {mcc, nmcc});
      report.Derive("additivity_gap", DerivedKind::kDifference, std::move(gap));
    }
    return report.Finish();
  }

  DataMatrix cloned_data = data;
  for (std::size_t i = 0; i < coalition.size(); ++i) {
    cloned_data = AddClone(cloned_data, cloned_data.index_of(coalition[i]), options, i);
  }
  const Arm cloned("with_clones", cloned_data, target);
  for (const std::string& name : coalition) {
    report.Note(CloneNote(cloned_data, cloned_data.index_of(name)));
  }
  const std::vector<std::size_t> cloned_members = Indices(cloned.features(), coalition);
  std::vector<std::string> clone_names;
  for (const std::string& name : coalition) clone_names.push_back(name + "_corr");
  const std::vector<std::size_t> clones = Indices(cloned.features(), clone_names);
  for (const NamedModel& model : models) {
    const PredictorHandle without = FitModel(model.spec, base.data, target);
    const std::size_t nmcc0 = report.Estimate(base, model, *without, members, Mode::kNmcc);
    const std::size_t mcc0 = report.Estimate(base, model, *without, members, Mode::kMcc);
    const PredictorHandle with = FitModel(model.spec, cloned.data, target);
    const std::size_t nmcc1 = report.Estimate(cloned, model, *with, cloned_members, Mode::kNmcc);
    report.Estimate(cloned, model, *with, clones, Mode::kNmcc);
    const std::size_t mcc1 = report.Estimate(cloned, model, *with, cloned_members, Mode::kMcc);
    report.Estimate(cloned, model, *with, clones, Mode::kMcc);

    report.Derive("halving", DerivedKind::kRatio, {nmcc1, nmcc0});
    report.Derive("restoration", DerivedKind::kRatio, {mcc1, nmcc0});
    report.Derive("mcc_over_nmcc", DerivedKind::kRatio, {mcc0, nmcc0});
  }
  return report.Finish();
}

void WriteReportCsv(const ScenarioReport& report, std::ostream& out) {
  out << "scenario,condition,model,target,mode,value,std_error,M,seed\n";
  for (const EstimateRow& r : report.rows) {
    out << report.scenario << ',' << r.condition << ',' << r.model << ',' << r.target << ','
        << ModeName(r.mode) << ',' << FormatDouble(r.value) << ',' << FormatDouble(r.std_error)
        << ',' << r.iterations << ',' << r.seed << '\n';
  }
  for (const DerivedRow& d : report.derived) {
    out << report.scenario << ',' << d.name << ',' << d.model << ',' << d.target << ','
        << (d.kind == DerivedKind::kRatio ? "ratio" : "difference") << ','
        << FormatDouble(d.value) << ',' << FormatDouble(d.std_error) << ',' << report.iterations
        << ',' << report.seed << '\n';
  }
}

void WriteReportMarkdown(const ScenarioReport& report, std::ostream& out) {
  out << "## " << report.scenario << "\n\n";
  out << "Instance row " << report.instance << ", M = " << report.iterations
      << ", seed = " << report.seed << ", data fingerprint " << std::hex << std::setw(16)
      << std::setfill('0') << report.fingerprint << std::dec << std::setfill(' ') << "\n\n";

  // One line per (model, condition, target) with the two modes side by side.
  out << "| model | condition | target | NMCC | MCC |\n|---|---|---|---|---|\n";
  std::vector<std::string> seen;
  for (const EstimateRow& r : report.rows) {
    const std::string key = r.model + '\x1f' + r.condition + '\x1f' + r.target;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    std::string cells[2] = {"-", "-"};
    for (const EstimateRow& o : report.rows) {
      if (o.model == r.model && o.condition == r.condition && o.target == r.target) {
        cells[o.mode == Mode::kMcc ? 1 : 0] = FormatEstimate(o.value, o.std_error);
      }
    }
    out << "| " << r.model << " | " << r.condition << " | " << r.target << " | " << cells[0]
        << " | " << cells[1] << " |\n";
  }
  if (!report.derived.empty()) {
    out << "\n| model | target | quantity | value |\n|---|---|---|---|\n";
    for (const DerivedRow& d : report.derived) {
      out << "| " << d.model << " | " << d.target << " | " << d.name << " | "
          << FormatEstimate(d.value, d.std_error) << " |\n";
    }
  }
  if (!report.notes.empty()) {
    out << '\n';
    for (const std::string& note : report.notes) out << "- " << note << '\n';
  }
}

TimingReport RunTiming(const ModelSpec& spec, const TimingOptions& options) {
  if (options.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  TimingReport report;
  report.model = DescribeModelSpec(spec);
  report.iterations = options.iterations;
  report.seed = options.seed;
  report.repeats = options.repeats;

  using Clock = std::chrono::steady_clock;
  for (std::size_t width : options.widths) {
    if (options.feature >= width) {
      throw Error(ErrorCode::kInvalidArgument, "timed feature is outside width " +
                                                   std::to_string(width));
    }
    const DataMatrix data = GenerateSynthetic(
        SyntheticPreset("wide", options.rows, DeriveSeed(options.seed, "timing-data"), width));
    ModelSpec fitted_spec = spec;
    if (auto* forest = std::get_if<ForestParams>(&fitted_spec.params)) {
      if (forest->tree.max_features == 0) {
        forest->tree.max_features = static_cast<int>(std::max<std::size_t>(1, width / 3));
      }
    }
    const PredictorHandle model = FitModel(fitted_spec, data, "y");
    auto background = std::make_shared<const Background>(SplitTarget(data, "y").features);
    const std::size_t instance = QuantileRow(background->data(), options.feature, 0.9);
    const std::span<const double> x = background->data().row(instance);

    EstimatorConfig config;
    config.iterations = options.iterations;
    config.seed = options.seed;
    config.background = background;
    config.workers = 1;
    EstimatorConfig nmcc = config;
    nmcc.mode = Mode::kNmcc;
    EstimatorConfig mcc = config;
    mcc.mode = Mode::kMcc;
    const ShapleyEstimate ref_nmcc = EstimateSingle(*model, nmcc, x, options.feature);
    const ShapleyEstimate ref_mcc = EstimateSingle(*model, mcc, x, options.feature);

    std::vector<double> t_nmcc;
    std::vector<double> t_mcc;
    for (int r = 0; r < options.repeats; ++r) {
      // Alternate the order so drift affects both modes alike.
      for (int pass = 0; pass < 2; ++pass) {
        const bool run_mcc = (pass == 0) == (r % 2 == 1);
        const EstimatorConfig& cfg = run_mcc ? mcc : nmcc;
        const auto start = Clock::now();
        const ShapleyEstimate est = EstimateSingle(*model, cfg, x, options.feature);
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        const ShapleyEstimate& ref = run_mcc ? ref_mcc : ref_nmcc;
        if (std::bit_cast<std::uint64_t>(est.value) != std::bit_cast<std::uint64_t>(ref.value)) {
          throw Error(ErrorCode::kInvalidArgument, "timed estimate differs from reference run");
        }
        (run_mcc ? t_mcc : t_nmcc).push_back(elapsed.count());
      }
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    };
    auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return *hi - *lo;
    };
    TimingRow row;
    row.width = width;
    row.nmcc_median = median(t_nmcc);
    row.nmcc_spread = spread(t_nmcc);
    row.mcc_median = median(t_mcc);
    row.mcc_spread = spread(t_mcc);
    row.ratio = row.mcc_median / row.nmcc_median;
    row.nmcc_value = ref_nmcc.value;
    row.mcc_value = ref_mcc.value;
    report.rows.push_back(row);
  }
  return report;
}

void WriteTimingCsv(const TimingReport& report, std::ostream& out) {
  out << "width,nmcc_median_s,nmcc_spread_s,mcc_median_s,mcc_spread_s,ratio,nmcc_value,"
         "mcc_value,M,seed,repeats\n";
  for (const TimingRow& r : report.rows) {
    out << r.width << ',' << FormatDouble(r.nmcc_median) << ',' << FormatDouble(r.nmcc_spread)
        << ',' << FormatDouble(r.mcc_median) << ',' << FormatDouble(r.mcc_spread) << ','
        << FormatDouble(r.ratio) << ',' << FormatDouble(r.nmcc_value) << ','
        << FormatDouble(r.mcc_value) << ',' << report.iterations << ',' << report.seed << ','
        << report.repeats << '\n';
  }
}

void WriteTimingMarkdown(const TimingReport& report, std::ostream& out) {
  out << "## bench\n\nModel " << report.model << ", M = " << report.iterations
      << ", seed = " << report.seed << ", " << report.repeats << " repeats, 1 worker\n\n";
  out << "| width | NMCC (s) | MCC (s) | MCC/NMCC |\n|---|---|---|---|\n";
  out << std::fixed;
  for (const TimingRow& r : report.rows) {
    out << "| " << r.width << " | " << std::setprecision(3) << r.nmcc_median << " ± "
        << r.nmcc_spread << " | " << r.mcc_median << " ± " << r.mcc_spread << " | "
        << std::setprecision(3) << r.ratio << " |\n";
  }
  out << std::defaultfloat;
}

}  // namespace mccshap
