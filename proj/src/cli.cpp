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

#include "mccshap/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mccshap/dataset.hpp"
#include "mccshap/error.hpp"
#include "mccshap/harness.hpp"
#include "mccshap/models.hpp"
#include "mccshap/shapley.hpp"
#include "mccshap/synthetic.hpp"

namespace mccshap {
namespace {

constexpr std::size_t kSyntheticRows = 1000;

struct Options {
  std::string data;
  std::string target = "y";
  std::optional<std::size_t> instance;
  std::string feature;
  std::vector<std::string> features;
  std::string model;
  std::vector<std::string> model_opts;
  std::int64_t iterations = 10000;
  std::uint64_t seed = 42;
  std::string mode = "both";
  std::string out;
  std::string format = "csv";
  std::vector<std::string> categorical;
  int workers = 1;
  bool clones = false;
  // bench
  std::vector<std::size_t> widths = {10, 100, 1000};
  int repeats = 5;
  std::size_t rows = 500;
  // synth
  std::string preset = "scenario1";
  std::size_t width = 10;
};

int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return kExitUsage;
    case ErrorCategory::kData:
      return kExitData;
    case ErrorCategory::kNumerical:
      return kExitNumerical;
  }
  return kExitData;
}

DataMatrix LoadData(const Options& o, std::ostream& err) {
  CsvLoad load = LoadCsv(o.data, CsvSchema{o.categorical});
  if (load.dropped_rows > 0) {
    err << "warning: dropped " << load.dropped_rows << " row(s) with missing or invalid values\n";
  }
  return std::move(load.data);
}

// Data for scenario commands: the CSV when given, otherwise a synthetic preset.
DataMatrix ScenarioData(const Options& o, std::string_view preset, std::ostream& err) {
  if (!o.data.empty()) return LoadData(o, err);
  return GenerateSynthetic(SyntheticPreset(preset, kSyntheticRows, o.seed));
}

// "family:key=value" applies to one family, "key=value" to all of them.
std::vector<std::string> OptionsFor(std::string_view family,
                                    const std::vector<std::string>& opts) {
  std::vector<std::string> out;
  for (const std::string& opt : opts) {
    const auto colon = opt.find(':');
    const auto eq = opt.find('=');
    if (colon != std::string::npos && (eq == std::string::npos || colon < eq)) {
      if (std::string_view(opt).substr(0, colon) == family) out.push_back(opt.substr(colon + 1));
    } else {
      out.push_back(opt);
    }
  }
  return out;
}

ModelSpec BuildSpec(std::string_view family, std::vector<std::string> opts, int workers) {
  ModelSpec spec = ParseModelSpec(family, opts);
  if (auto* forest = std::get_if<ForestParams>(&spec.params)) forest->workers = workers;
  return spec;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Scenario commands default to a tree, a forest and a lightly ridged linear
// model (ordinary least squares is unstable once a clone is added).
std::vector<NamedModel> ScenarioModels(const Options& o) {
  std::vector<NamedModel> models;
  const std::vector<std::string> families =
      o.model.empty() ? std::vector<std::string>{"tree", "forest", "linear"} : SplitList(o.model);
  if (families.empty()) throw Error(ErrorCode::kInvalidArgument, "--model lists no family");
  for (const std::string& family : families) {
    std::vector<std::string> opts;
    if (o.model.empty() && family == "linear") opts.push_back("ridge_eps=1");
    for (std::string& extra : OptionsFor(family, o.model_opts)) opts.push_back(std::move(extra));
    models.push_back({family, BuildSpec(family, opts, o.workers)});
  }
  return models;
}

std::vector<Mode> Modes(const std::string& mode) {
  if (mode == "nmcc") return {Mode::kNmcc};
  if (mode == "mcc") return {Mode::kMcc};
  return {Mode::kNmcc, Mode::kMcc};
}

ScenarioOptions MakeScenarioOptions(const Options& o) {
  ScenarioOptions s;
  s.iterations = o.iterations;
  s.seed = o.seed;
  s.instance = o.instance;
  s.workers = o.workers;
  return s;
}

void WriteEstimates(const Options& o, std::size_t instance,
                    const std::vector<std::pair<std::string, ShapleyEstimate>>& rows,
                    std::ostream& out) {
  if (o.format == "md") {
    out << "| target | mode | value | std_error | M |\n|---|---|---|---|---|\n";
    for (const auto& [label, est] : rows) {
      out << "| " << label << " | " << ModeName(est.mode) << " | " << FormatDouble(est.value)
          << " | " << FormatDouble(est.std_error) << " | " << est.iterations << " |\n";
    }
    out << "\nInstance row " << instance << ", seed " << o.seed << "\n";
    return;
  }
  WriteEstimateHeader(out);
  for (const auto& [label, est] : rows) WriteEstimateRow(out, instance, label, est, o.seed);
}

struct Explained {
  std::shared_ptr<const Background> background;
  PredictorHandle model;
  std::size_t instance = 0;
};

Explained Prepare(const Options& o, std::ostream& err) {
  const DataMatrix data = LoadData(o, err);
  const std::string family = o.model.empty() ? "forest" : o.model;
  if (family.find(',') != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "explain commands take a single --model family");
  }
  Explained e;
  e.model = FitModel(BuildSpec(family, OptionsFor(family, o.model_opts), o.workers), data,
                     o.target);
  e.background = std::make_shared<const Background>(SplitTarget(data, o.target).features);
  e.instance = o.instance.value_or(0);
  if (e.instance >= e.background->data().rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--instance " + std::to_string(e.instance) + " is out of range (" +
                    std::to_string(e.background->data().rows()) + " rows)");
  }
  return e;
}

EstimatorConfig MakeConfig(const Options& o, const Explained& e, Mode mode) {
  EstimatorConfig config;
  config.iterations = o.iterations;
  config.seed = o.seed;
  config.mode = mode;
  config.background = e.background;
  config.workers = o.workers;
  return config;
}

int RunExplain(const Options& o, std::ostream& out, std::ostream& err) {
  const Explained e = Prepare(o, err);
  const DataMatrix& features = e.background->data();
  const std::span<const double> x = features.row(e.instance);
  std::vector<std::pair<std::string, ShapleyEstimate>> rows;
  std::optional<Error> first_failure;
  if (!o.feature.empty()) {
    const std::size_t j = features.index_of(o.feature);
    for (Mode mode : Modes(o.mode)) {
      rows.emplace_back(o.feature, EstimateSingle(*e.model, MakeConfig(o, e, mode), x, j));
    }
  } else {
    // Every feature; failures are reported and the rest still written.
    std::vector<std::vector<FeatureOutcome>> by_mode;
    for (Mode mode : Modes(o.mode)) by_mode.push_back(EstimateAll(*e.model, MakeConfig(o, e, mode), x));
    for (std::size_t j = 0; j < features.cols(); ++j) {
      for (const auto& outcomes : by_mode) {
        const FeatureOutcome& outcome = outcomes[j];
        if (outcome.estimate) {
          rows.emplace_back(features.names()[j], *outcome.estimate);
        } else {
          err << "warning: " << features.names()[j] << ": " << outcome.message << '\n';
          if (!first_failure) first_failure.emplace(*outcome.error, outcome.message);
        }
      }
    }
  }
  WriteEstimates(o, e.instance, rows, out);
  return first_failure ? ExitCodeFor(first_failure->category()) : kExitOk;
}

int RunExplainGroup(const Options& o, std::ostream& out, std::ostream& err) {
  const Explained e = Prepare(o, err);
  const DataMatrix& features = e.background->data();
  std::vector<std::size_t> coalition;
  for (const std::string& name : o.features) coalition.push_back(features.index_of(name));
  std::vector<std::pair<std::string, ShapleyEstimate>> rows;
  for (Mode mode : Modes(o.mode)) {
    ShapleyEstimate est = EstimateCoalition(*e.model, MakeConfig(o, e, mode),
                                            features.row(e.instance), coalition);
    rows.emplace_back(TargetLabel(est, features.names()), std::move(est));
  }
  WriteEstimates(o, e.instance, rows, out);
  return kExitOk;
}

void WriteReport(const Options& o, const ScenarioReport& report, std::ostream& out) {
  if (o.format == "md") {
    WriteReportMarkdown(report, out);
  } else {
    WriteReportCsv(report, out);
  }
}

int RunScenario1Command(const Options& o, std::ostream& out, std::ostream& err) {
  const DataMatrix data = ScenarioData(o, "scenario1", err);
  const std::string feature = o.feature.empty() && o.data.empty() ? "misc" : o.feature;
  if (feature.empty()) throw Error(ErrorCode::kInvalidArgument, "--feature is required");
  WriteReport(o, RunScenario1(data, o.target, feature, ScenarioModels(o), MakeScenarioOptions(o)),
              out);
  return kExitOk;
}

int RunScenario2Command(const Options& o, std::ostream& out, std::ostream& err) {
  const DataMatrix data = ScenarioData(o, "scenario2", err);
  std::string feature = o.feature;
  std::vector<std::string> correlated = o.features;
  if (o.data.empty()) {
    if (feature.empty()) feature = "first_floor";
    if (correlated.empty()) correlated = {"basement"};
  }
  if (feature.empty()) throw Error(ErrorCode::kInvalidArgument, "--feature is required");
  if (correlated.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--features must name the correlated set");
  }
  WriteReport(o,
              RunScenario2(data, o.target, feature, correlated, ScenarioModels(o),
                           MakeScenarioOptions(o)),
              out);
  return kExitOk;
}

int RunCombinationCommand(const Options& o, std::ostream& out, std::ostream& err) {
  const DataMatrix data = ScenarioData(o, "combination", err);
  std::vector<std::string> coalition = o.features;
  if (coalition.empty() && o.data.empty()) {
    coalition = o.clones ? std::vector<std::string>{"misc", "porch"}
                         : std::vector<std::string>{"first_floor", "second_floor"};
  }
  WriteReport(o,
              RunCombination(data, o.target, coalition, ScenarioModels(o), o.clones,
                             MakeScenarioOptions(o)),
              out);
  return kExitOk;
}

int RunBench(const Options& o, std::ostream& out) {
  const std::string family = o.model.empty() ? "forest" : o.model;
  TimingOptions t;
  t.widths = o.widths;
  t.rows = o.rows;
  t.iterations = o.iterations;
  t.seed = o.seed;
  t.repeats = o.repeats;
  // Timing always runs on one worker.
  const TimingReport report = RunTiming(BuildSpec(family, OptionsFor(family, o.model_opts), 1), t);
  if (o.format == "md") {
    WriteTimingMarkdown(report, out);
  } else {
    WriteTimingCsv(report, out);
  }
  return kExitOk;
}

int RunSynth(const Options& o, std::ostream& out) {
  WriteCsv(GenerateSynthetic(SyntheticPreset(o.preset, o.rows, o.seed, o.width)), out);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley values with and without multicollinearity correction"};
  app.name("mccshap");
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Input CSV with a header row")->check(CLI::ExistingFile);
    sub->add_option("--target", o.target, "Target column")->capture_default_str();
    sub->add_option("--model", o.model, "Model family (linear|logistic|tree|forest|knn)");
    sub->add_option("--model-opt", o.model_opts,
                    "Model option KEY=VALUE or FAMILY:KEY=VALUE (repeatable)")
        ->allow_extra_args(false);
    sub->add_option("--iterations", o.iterations, "Monte-Carlo iterations M")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "Output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "md"}));
  };
  const auto estimation = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--instance", o.instance, "Row index of the explained instance");
    sub->add_option("--categorical", o.categorical, "Columns holding categorical codes")
        ->delimiter(',');
    sub->add_option("--workers", o.workers, "Worker threads")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  CLI::App* explain = app.add_subcommand("explain", "Per-feature values for one instance");
  estimation(explain);
  explain->add_option("--feature", o.feature, "Feature to explain (default: all)");
  explain->add_option("--mode", o.mode, "mcc|nmcc|both")
      ->capture_default_str()
      ->check(CLI::IsMember({"mcc", "nmcc", "both"}));
  explain->get_option("--data")->required();

  CLI::App* group = app.add_subcommand("explain-group", "Joint value of a feature coalition");
  estimation(group);
  group->add_option("--features", o.features, "Coalition members")->delimiter(',')->required();
  group->add_option("--mode", o.mode, "mcc|nmcc|both")
      ->capture_default_str()
      ->check(CLI::IsMember({"mcc", "nmcc", "both"}));
  group->get_option("--data")->required();

  CLI::App* s1 = app.add_subcommand("scenario1", "Clone-injection experiment");
  estimation(s1);
  s1->add_option("--feature", o.feature, "Feature to clone");

  CLI::App* s2 = app.add_subcommand("scenario2", "Correlated-set removal experiment");
  estimation(s2);
  s2->add_option("--feature", o.feature, "Feature of interest");
  s2->add_option("--features", o.features, "Correlated set removed in the first arm")
      ->delimiter(',');

  CLI::App* combo = app.add_subcommand("combination", "Coalition experiment");
  estimation(combo);
  combo->add_option("--features", o.features, "Coalition members")->delimiter(',');
  combo->add_flag("--clones", o.clones, "Clone every member and compare against the baseline");

  CLI::App* bench = app.add_subcommand("bench", "MCC versus NMCC wall-clock time");
  common(bench);
  bench->add_option("--widths", o.widths, "Synthetic feature counts")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--repeats", o.repeats, "Repeats per width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--rows", o.rows, "Synthetic rows")->capture_default_str();

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic data set as CSV");
  synth->add_option("--preset", o.preset, "Preset name")
      ->capture_default_str()
      ->check(CLI::IsMember(SyntheticPresetNames()));
  synth->add_option("--rows", o.rows, "Rows")->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--width", o.width, "Feature count for the wide preset")
      ->capture_default_str();
  synth->add_option("--out", o.out, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Buffer so a failed run never leaves a partial output file.
  std::ostringstream buffer;
  int code = kExitOk;
  try {
    if (explain->parsed()) {
      code = RunExplain(o, buffer, err);
    } else if (group->parsed()) {
      code = RunExplainGroup(o, buffer, err);
    } else if (s1->parsed()) {
      code = RunScenario1Command(o, buffer, err);
    } else if (s2->parsed()) {
      code = RunScenario2Command(o, buffer, err);
    } else if (combo->parsed()) {
      code = RunCombinationCommand(o, buffer, err);
    } else if (bench->parsed()) {
      code = RunBench(o, buffer);
    } else {
      code = RunSynth(o, buffer);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  if (o.out.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.out, std::ios::binary);
    file << buffer.str();
    if (!file) {
      err << "error: cannot write " << o.out << '\n';
      return kExitData;
    }
  }
  return code;
}

}  // namespace mccshap
