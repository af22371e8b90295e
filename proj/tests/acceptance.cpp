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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mccshap/adjust.hpp"
#include "mccshap/cli.hpp"
#include "mccshap/dataset.hpp"
#include "mccshap/harness.hpp"
#include "mccshap/linalg.hpp"
#include "mccshap/models.hpp"
#include "mccshap/shapley.hpp"
#include "mccshap/synthetic.hpp"
#include "oracles.hpp"

namespace mccshap {
namespace {

using testing::CramerSolve;
using testing::NaiveCovariance;
using testing::RandomCorrelatedData;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failures; the first few are kept for the report line.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 4) failed_.push_back(what);
  }
  void Info(const std::string& text) { info_.push_back(text); }

  Outcome Finish() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < info_.size(); ++i) out << (i ? "; " : "") << info_[i];
    if (failures_ > 0) {
      out << (info_.empty() ? "" : "; ") << failures_ << " failed check(s): ";
      for (std::size_t i = 0; i < failed_.size(); ++i) out << (i ? "; " : "") << failed_[i];
    }
    return {failures_ == 0, out.str()};
  }

 private:
  int failures_ = 0;
  std::vector<std::string> failed_;
  std::vector<std::string> info_;
};

std::string Fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

bool SameBits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

std::vector<std::size_t> RandomSubset(std::mt19937_64& rng, std::size_t m, std::size_t q) {
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(q);
  return all;
}

std::vector<NamedModel> ScenarioModels() {
  const std::vector<std::string> none;
  const std::vector<std::string> ridge = {"ridge_eps=1"};
  return {{"tree", ParseModelSpec("tree", none)},
          {"forest", ParseModelSpec("forest", none)},
          {"linear", ParseModelSpec("linear", ridge)}};
}

double CombinedSe(const EstimateRow& a, const EstimateRow& b) {
  return std::hypot(a.std_error, b.std_error);
}

// Smallest clone correlation recorded in the report notes.
double MinCloneCorrelation(const ScenarioReport& report) {
  double lowest = 1.0;
  for (const std::string& note : report.notes) {
    if (note.rfind("corr(", 0) != 0) continue;
    lowest = std::min(lowest, std::stod(note.substr(note.rfind('=') + 1)));
  }
  return lowest;
}

Outcome Orthogonality() {
  Checker c;
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng() % 19;
    const std::size_t q = 1 + rng() % std::min<std::size_t>(4, m - 1);
    const DataMatrix data = RandomCorrelatedData(200, m, 5000 + static_cast<std::uint64_t>(trial));
    const CovarianceCache cache = ComputeCovariance(data);
    const CoalitionSpec coalition(RandomSubset(rng, m, q), cache);
    const AdjustmentPlan plan = BuildPlan(cache, data, coalition);
    // Re-measure on explicitly adjusted columns with the naive covariance.
    for (std::size_t r = 0; r < plan.adjustable.size(); ++r) {
      const std::size_t k = plan.adjustable[r];
      Eigen::VectorXd adjusted = data.column(k);
      for (std::size_t s = 0; s < q; ++s) {
        adjusted += plan.coefficients(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *
                    data.column(coalition.indices()[s]);
      }
      for (std::size_t t : coalition.indices()) {
        RowMatrix two(adjusted.size(), 2);
        two.col(0) = data.column(t);
        two.col(1) = adjusted;
        const DataMatrix pair(std::move(two), {"t", "adj"});
        const auto cov = NaiveCovariance(pair);
        const double normalized = std::abs(cov[0][1]) / std::sqrt(cov[0][0] * cov[1][1]);
        worst = std::max(worst, normalized);
        c.Expect(normalized <= 1e-8, "trial " + std::to_string(trial) + " k=" + std::to_string(k) +
                                         " residual " + Fmt(normalized));
      }
    }
  }
  c.Info("50 plans, worst normalized |cov| " + Fmt(worst, 3));
  return c.Finish();
}

Outcome ClosedFormReduction() {
  Checker c;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DataMatrix data = RandomCorrelatedData(100, 5, 7000 + seed);
    const CovarianceCache cache = ComputeCovariance(data);
    for (std::size_t k = 2; k < 5; ++k) {
      const Eigen::VectorXd one = AfCoalition(cache, CoalitionSpec({0}, cache), k);
      c.Expect(SameBits(one[0], AfSingle(cache, 0, k)), "q=1 differs from AfSingle");
      const Eigen::VectorXd two = AfCoalition(cache, CoalitionSpec({0, 1}, cache), k);
      const auto [a, b] = AfPair(cache, 0, 1, k);
      c.Expect(SameBits(two[0], a) && SameBits(two[1], b), "q=2 differs from AfPair");
      const double e1 = cache.cov(0, k) + a * cache.variance(0) + b * cache.cov(0, 1);
      const double e2 = cache.cov(1, k) + a * cache.cov(0, 1) + b * cache.variance(1);
      worst = std::max({worst, std::abs(e1), std::abs(e2)});
    }
  }
  c.Expect(worst <= 1e-12, "pair equation residual " + Fmt(worst, 3));
  c.Info("60 cases, worst pair residual " + Fmt(worst, 3));
  return c.Finish();
}

Outcome SolverEquivalence() {
  Checker c;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  int systems = 0;
  while (systems < 100) {
    const std::size_t q = 1 + rng() % 4;
    Eigen::MatrixXd a(q, q);
    Eigen::VectorXd b(q);
    for (std::size_t i = 0; i < q; ++i) {
      b[static_cast<Eigen::Index>(i)] = normal(rng);
      for (std::size_t j = 0; j < q; ++j) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng);
      }
    }
    testing::Matrix am(q, std::vector<double>(q));
    std::vector<double> bv(q);
    for (std::size_t i = 0; i < q; ++i) {
      bv[i] = b[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < q; ++j) {
        am[i][j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    // Keep clearly nonsingular draws.
    if (std::abs(testing::CofactorDeterminant(am)) < 0.05) continue;
    ++systems;
    const PivotedSolve solved = SolvePartialPivot(a, b, 1e-10);
    c.Expect(!solved.singular, "nonsingular system reported singular");
    if (solved.singular) continue;
    const std::vector<double> oracle = CramerSolve(am, bv);
    for (std::size_t i = 0; i < q; ++i) {
      worst = std::max(worst, std::abs(solved.solution[static_cast<Eigen::Index>(i)] - oracle[i]));
    }
  }
  c.Expect(worst <= 1e-9, "max deviation " + Fmt(worst, 3));
  c.Info("100 systems, max |elimination - Cramer| " + Fmt(worst, 3));
  return c.Finish();
}

Outcome OracleConvergence() {
  Checker c;
  const std::size_t m = 5;
  const DataMatrix features = RandomCorrelatedData(48, m, 31);
  Eigen::VectorXd y(48);
  for (Eigen::Index i = 0; i < 48; ++i) {
    const auto r = features.row(static_cast<std::size_t>(i));
    y[i] = 2 * r[0] - r[1] + r[2] * r[3] + (r[4] > 0 ? 1.0 : -1.0);
  }
  const DataMatrix data = features.with_column("y", FeatureKind::kNumeric, y);
  auto background = std::make_shared<const Background>(features);
  TreeParams tp;
  tp.max_depth = 5;
  tp.min_samples_leaf = 2;
  const std::vector<std::pair<std::string, PredictorHandle>> models = {
      {"linear", FitLinear(data, "y", 0.0)}, {"tree", FitTree(data, "y", tp)}};
  double worst_ratio = 0.0;
  int checks = 0;
  for (const auto& [name, model] : models) {
    const Eigen::VectorXd outputs = model->Predict(features.values());
    const double range = outputs.maxCoeff() - outputs.minCoeff();
    for (std::size_t inst = 0; inst < 10; ++inst) {
      const auto row = features.row(inst * 4);
      const std::vector<double> x(row.begin(), row.end());
      for (std::size_t j = 0; j < m; ++j) {
        const EstimatorConfig config{200000, 100 + inst, Mode::kNmcc, background, 1};
        const ShapleyEstimate est = EstimateSingle(*model, config, x, j);
        const double exact = ExactShapley(*model, features, x, j);
        const double tol = std::max(5.0 * est.std_error, 1e-6 * range);
        const double err = std::abs(est.value - exact);
        worst_ratio = std::max(worst_ratio, err / tol);
        ++checks;
        c.Expect(err <= tol, name + " instance " + std::to_string(inst * 4) + " feature " +
                                 std::to_string(j) + " |err| " + Fmt(err) + " > " + Fmt(tol));
      }
    }
  }
  c.Info(std::to_string(checks) + " estimates at M=200000, worst |err|/tol " + Fmt(worst_ratio, 3));
  return c.Finish();
}

Outcome LinearAnalytic() {
  Checker c;
  SyntheticSpec spec = SyntheticPreset("independent", 1000, 77);
  spec.exact_moments = false;
  const DataMatrix data = GenerateSynthetic(spec);
  const TargetSplit split = SplitTarget(data, "y");
  const auto model = FitLinear(data, "y", 0.0);
  auto background = std::make_shared<const Background>(split.features);
  const Eigen::VectorXd mean = split.features.values().colwise().mean();
  double worst = 0.0;
  for (std::size_t inst : {3u, 250u, 777u}) {
    const auto row = split.features.row(inst);
    const std::vector<double> x(row.begin(), row.end());
    const EstimatorConfig config{20000, 9, Mode::kNmcc, background, 1};
    for (std::size_t j = 0; j < x.size(); ++j) {
      const ShapleyEstimate est = EstimateSingle(*model, config, x, j);
      const double truth = model->weights()[static_cast<Eigen::Index>(j)] *
                           (x[j] - mean[static_cast<Eigen::Index>(j)]);
      const double z = std::abs(est.value - truth) / std::max(est.std_error, 1e-300);
      worst = std::max(worst, z);
      c.Expect(std::abs(est.value - truth) <= 4.0 * est.std_error + 1e-12,
               "feature " + std::to_string(j) + " z=" + Fmt(z));
    }
    const std::size_t coalition[] = {0, 2};
    const ShapleyEstimate group = EstimateCoalition(*model, config, x, coalition);
    double truth = 0.0;
    for (std::size_t j : coalition) {
      truth += model->weights()[static_cast<Eigen::Index>(j)] * (x[j] - mean[static_cast<Eigen::Index>(j)]);
    }
    const double z = std::abs(group.value - truth) / std::max(group.std_error, 1e-300);
    worst = std::max(worst, z);
    c.Expect(std::abs(group.value - truth) <= 4.0 * group.std_error + 1e-12,
             "coalition z=" + Fmt(z));
  }
  c.Info("3 instances x (5 features + 1 coalition), worst |err|/se " + Fmt(worst, 3));
  return c.Finish();
}

Outcome IndependenceDegeneracy() {
  Checker c;
  // Two-level full factorial: every covariance off the diagonal is exactly 0.
  const std::size_t m = 6;
  RowMatrix v(64, static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < 64; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) v(i, j) = ((i >> j) & 1) ? 1.5 : -1.5;
  }
  const DataMatrix features(v, {"a", "b", "c", "d", "e", "f"});
  Eigen::VectorXd y = v.col(0) + 0.5 * v.col(1).cwiseProduct(v.col(2)) - v.col(3);
  const DataMatrix data = features.with_column("y", FeatureKind::kNumeric, y);
  auto background = std::make_shared<const Background>(features);
  const auto tree = FitTree(data, "y", TreeParams{});
  const auto linear = FitLinear(data, "y", 0.0);
  const std::vector<double> x(features.row(37).begin(), features.row(37).end());
  int compared = 0;
  for (const Predictor* model : {static_cast<const Predictor*>(tree.get()),
                                 static_cast<const Predictor*>(linear.get())}) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto a = EstimateSingle(*model, {5000, 11, Mode::kNmcc, background, 1}, x, j);
      const auto b = EstimateSingle(*model, {5000, 11, Mode::kMcc, background, 1}, x, j);
      c.Expect(SameBits(a.value, b.value) && SameBits(a.std_error, b.std_error),
               "feature " + std::to_string(j));
      ++compared;
    }
    const std::size_t pair[] = {1, 2};
    const auto a = EstimateCoalition(*model, {5000, 11, Mode::kNmcc, background, 1}, x, pair);
    const auto b = EstimateCoalition(*model, {5000, 11, Mode::kMcc, background, 1}, x, pair);
    c.Expect(SameBits(a.value, b.value) && SameBits(a.std_error, b.std_error), "coalition b+c");
    ++compared;
  }
  c.Info(std::to_string(compared) + " MCC/NMCC pairs compared bitwise");
  return c.Finish();
}

ScenarioOptions DefaultScale() {
  ScenarioOptions o;
  o.iterations = 10000;
  o.seed = 42;
  return o;
}

Outcome CloneScenario() {
  Checker c;
  const DataMatrix data = GenerateSynthetic(SyntheticPreset("scenario1", 1000, 42));
  const auto models = ScenarioModels();
  const ScenarioReport r = RunScenario1(data, "y", "misc", models, DefaultScale());
  const double corr = MinCloneCorrelation(r);
  c.Expect(corr >= 0.999, "clone corr " + Fmt(corr, 6));
  c.Info("clone corr " + Fmt(corr, 6));
  for (const NamedModel& model : models) {
    const double halving = r.derived_row("halving", model.name, "misc").value;
    const double restoration = r.derived_row("restoration", model.name, "misc").value;
    const auto& nmcc = r.row("without_clone", model.name, "misc", Mode::kNmcc);
    const auto& mcc = r.row("without_clone", model.name, "misc", Mode::kMcc);
    const double gap = std::abs(mcc.value - nmcc.value) / CombinedSe(mcc, nmcc);
    c.Info(model.name + " halving " + Fmt(halving) + " restoration " + Fmt(restoration) +
           " |MCC-NMCC|/se " + Fmt(gap, 3));
    c.Expect(halving >= 0.4 && halving <= 0.6, model.name + " halving " + Fmt(halving));
    c.Expect(restoration >= 0.85 && restoration <= 1.15,
             model.name + " restoration " + Fmt(restoration));
    c.Expect(gap <= 3.0, model.name + " no-clone MCC vs NMCC gap " + Fmt(gap, 3) + " se");
  }
  return c.Finish();
}

Outcome PairedClones() {
  Checker c;
  const DataMatrix data = GenerateSynthetic(SyntheticPreset("combination", 1000, 42));
  const auto models = ScenarioModels();
  const std::vector<std::string> coalition = {"misc", "porch"};
  const ScenarioReport r = RunCombination(data, "y", coalition, models, true, DefaultScale());
  c.Info("min clone corr " + Fmt(MinCloneCorrelation(r), 6));
  for (const NamedModel& model : models) {
    const double halving = r.derived_row("halving", model.name, "misc+porch").value;
    const double restoration = r.derived_row("restoration", model.name, "misc+porch").value;
    c.Info(model.name + " halving " + Fmt(halving) + " restoration " + Fmt(restoration));
    c.Expect(halving >= 0.4 && halving <= 0.6, model.name + " halving " + Fmt(halving));
    c.Expect(std::abs(restoration - 1.0) <= 0.15, model.name + " restoration " + Fmt(restoration));
  }
  return c.Finish();
}

Outcome CorrelatedRemoval() {
  Checker c;
  const auto models = ScenarioModels();
  const DataMatrix s2 = GenerateSynthetic(SyntheticPreset("scenario2", 1000, 42));
  const std::vector<std::string> correlated = {"basement"};
  const ScenarioReport r = RunScenario2(s2, "y", "first_floor", correlated, models, DefaultScale());
  for (const NamedModel& model : models) {
    const double reduction = r.derived_row("reduction", model.name, "first_floor").value;
    const double recovery = r.derived_row("recovery", model.name, "first_floor").value;
    c.Info(model.name + " reduction " + Fmt(reduction) + " recovery " + Fmt(recovery));
    c.Expect(reduction > 0.6 && reduction < 0.95, model.name + " reduction " + Fmt(reduction));
    c.Expect(std::abs(recovery - 1.0) <= 0.2, model.name + " recovery " + Fmt(recovery));
  }
  const DataMatrix combo = GenerateSynthetic(SyntheticPreset("combination", 1000, 42));
  const std::vector<std::string> pair = {"first_floor", "second_floor"};
  const ScenarioReport g = RunCombination(combo, "y", pair, models, false, DefaultScale());
  for (const NamedModel& model : models) {
    const auto& nmcc = g.row("all_features", model.name, "first_floor+second_floor", Mode::kNmcc);
    const auto& mcc = g.row("all_features", model.name, "first_floor+second_floor", Mode::kMcc);
    const double margin = (mcc.value - nmcc.value) / CombinedSe(mcc, nmcc);
    c.Info(model.name + " coalition (MCC-NMCC)/se " + Fmt(margin, 3));
    c.Expect(margin >= 5.0, model.name + " coalition margin " + Fmt(margin, 3) + " se");
  }
  return c.Finish();
}

Outcome TimingRatio() {
  Checker c;
  TimingOptions o;
  o.widths = {10, 100};
  o.iterations = 10000;
  o.repeats = 5;
  const std::vector<std::string> none;
  const TimingReport r = RunTiming(ParseModelSpec("forest", none), o);
  for (const TimingRow& row : r.rows) {
    c.Info("width " + std::to_string(row.width) + " ratio " + Fmt(row.ratio) + " (NMCC " +
           Fmt(row.nmcc_median) + " s, MCC " + Fmt(row.mcc_median) + " s)");
    c.Expect(row.ratio <= 1.15, "width " + std::to_string(row.width) + " ratio " + Fmt(row.ratio));
  }
  return c.Finish();
}

Outcome CliDeterminism() {
  Checker c;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mccshap_acceptance";
  fs::create_directories(dir);
  const std::string data = (dir / "data.csv").string();
  const auto run = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    return std::to_string(code) + "\n" + out.str() + err.str();
  };
  {
    std::ostringstream out, err;
    RunCli({"synth", "--preset", "combination", "--rows", "300", "--seed", "9", "--out", data},
           out, err);
  }
  const std::vector<std::vector<std::string>> commands = {
      {"synth", "--preset", "scenario2", "--rows", "200", "--seed", "4"},
      {"explain", "--data", data, "--model", "forest", "--model-opt", "n_trees=20",
       "--iterations", "500", "--instance", "12"},
      {"explain", "--data", data, "--model", "knn", "--model-opt", "k=7", "--feature", "porch",
       "--iterations", "500", "--format", "md"},
      {"explain-group", "--data", data, "--model", "tree", "--features",
       "first_floor,second_floor", "--iterations", "500", "--seed", "3"},
      {"scenario1", "--data", data, "--feature", "misc", "--model", "linear", "--iterations",
       "300"},
      {"scenario2", "--model", "tree", "--iterations", "300", "--format", "md"},
      {"combination", "--data", data, "--model", "forest", "--model-opt", "n_trees=10",
       "--clones", "--features", "misc,porch", "--iterations", "300"},
  };
  for (const auto& cmd : commands) {
    const std::string first = run(cmd);
    const std::string second = run(cmd);
    std::vector<std::string> threaded = cmd;
    if (cmd[0] != "synth") threaded.insert(threaded.end(), {"--workers", "3"});
    const std::string third = run(threaded);
    c.Expect(first.rfind("0\n", 0) == 0, cmd[0] + " exited non-zero");
    c.Expect(first == second, cmd[0] + " differs between runs");
    c.Expect(first == third, cmd[0] + " differs with 3 workers");
  }
  fs::remove_all(dir);
  c.Info(std::to_string(commands.size()) + " invocations x (repeat, 3 workers) byte-identical");
  return c.Finish();
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mccshap

int main() {
  using namespace mccshap;
  const std::vector<Criterion> criteria = {
      {1, "orthogonality", 10, Orthogonality},
      {2, "closed-form reduction", 1, ClosedFormReduction},
      {3, "solver equivalence", 5, SolverEquivalence},
      {4, "oracle convergence", 120, OracleConvergence},
      {5, "linear analytic", 60, LinearAnalytic},
      {6, "independence degeneracy", 10, IndependenceDegeneracy},
      {7, "clone halving and restoration", 300, CloneScenario},
      {8, "paired clones", 300, PairedClones},
      {9, "correlated removal and coalition", 300, CorrelatedRemoval},
      {10, "timing ratio", 600, TimingRatio},
      {11, "cli determinism", 60, CliDeterminism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_s;
    const bool pass = outcome.pass && in_budget;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %-34s %8.2fs / %.0fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                seconds, c.budget_s, outcome.detail.c_str(), in_budget ? "" : " [over budget]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
