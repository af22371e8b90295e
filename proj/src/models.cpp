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

#include "mccshap/models.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "mccshap/error.hpp"
#include "mccshap/linalg.hpp"
#include "mccshap/random.hpp"

namespace mccshap {
namespace {

constexpr double kDesignPivotRatio = 1e-12;

std::vector<std::string> FeatureNames(const DataMatrix& features) { return features.names(); }

// ---------------------------------------------------------------------------
// CART

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params)
      : x_(x), y_(y), params_(params), rng_(params.seed) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  std::vector<TreeNode> Build(std::vector<std::size_t> rows) {
    nodes_.clear();
    Grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int Grow(std::span<std::size_t> rows, int depth) {
    const auto count = static_cast<double>(rows.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r : rows) {
      sum += y_[static_cast<Eigen::Index>(r)];
      sum_sq += y_[static_cast<Eigen::Index>(r)] * y_[static_cast<Eigen::Index>(r)];
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, sum / count});

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (depth >= params_.max_depth || rows.size() < 2 * min_leaf) return id;
    const double node_sse = sum_sq - sum * sum / count;
    if (!(node_sse > 0.0)) return id;

    const Split split = BestSplit(rows, sum, node_sse);
    if (split.feature < 0) return id;

    const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold;
    });
    const auto left_count = static_cast<std::size_t>(mid - rows.begin());
    const int left = Grow(rows.subspan(0, left_count), depth + 1);
    const int right = Grow(rows.subspan(left_count), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  Split BestSplit(std::span<const std::size_t> rows, double sum, double node_sse) {
    // Candidates are visited in a random order and only a strictly better
    // split replaces the incumbent, so exact ties are broken at random.
    const auto m = features_.size();
    std::sort(features_.begin(), features_.end());
    rng_.Shuffle(std::span<std::size_t>(features_));
    std::span<std::size_t> candidates(features_);
    if (params_.max_features > 0 && static_cast<std::size_t>(params_.max_features) < m) {
      candidates = candidates.subspan(0, static_cast<std::size_t>(params_.max_features));
    }

    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const double base = sum * sum / static_cast<double>(n);
    Split best;
    best.gain = 1e-12 * node_sse;
    scratch_.resize(n);
    for (std::size_t f : candidates) {
      const auto col = static_cast<Eigen::Index>(f);
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        scratch_[i] = {x_(r, col), y_[r]};
      }
      std::sort(scratch_.begin(), scratch_.end());
      double left_sum = 0.0;
      for (std::size_t p = 1; p < n; ++p) {
        left_sum += scratch_[p - 1].second;
        if (p < min_leaf || n - p < min_leaf) continue;
        if (!(scratch_[p - 1].first < scratch_[p].first)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(p) +
                            right_sum * right_sum / static_cast<double>(n - p) - base;
        if (gain > best.gain) {
          const double lo = scratch_[p - 1].first;
          const double hi = scratch_[p].first;
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = Split{static_cast<int>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  TreeParams params_;
  CounterStream rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, double>> scratch_;
  std::vector<TreeNode> nodes_;
};

void ValidateTreeParams(const TreeParams& params) {
  if (params.max_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  }
  if (params.min_samples_leaf < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_samples_leaf must be >= 1");
  }
  if (params.max_features < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_features must be >= 0");
  }
}

double LogLoss(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + exp(z)) - y z, evaluated stably.
    const double softplus = z[i] > 0 ? z[i] + std::log1p(std::exp(-z[i])) : std::log1p(std::exp(z[i]));
    total += softplus - y[i] * z[i];
  }
  return total / static_cast<double>(z.size());
}

// ---------------------------------------------------------------------------
// Option parsing

template <typename T>
T ParseNumber(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "model option " + std::string(key) + " has bad value '" + std::string(text) + "'");
  }
  return value;
}

bool ParseBool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw Error(ErrorCode::kInvalidArgument,
              "model option " + std::string(key) + " expects a boolean, got '" + std::string(text) + "'");
}

bool ApplyTreeOption(TreeParams& tree, std::string_view key, std::string_view value) {
  if (key == "max_depth") {
    tree.max_depth = ParseNumber<int>(key, value);
  } else if (key == "min_samples_leaf") {
    tree.min_samples_leaf = ParseNumber<int>(key, value);
  } else if (key == "max_features") {
    tree.max_features = ParseNumber<int>(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Predictor

void Predictor::PredictBatch(const RowMatrix& x, std::span<double> out) const {
  if (static_cast<std::size_t>(x.cols()) != width()) {
    throw Error(ErrorCode::kWidthMismatch, "model expects " + std::to_string(width()) +
                                               " features, got " + std::to_string(x.cols()));
  }
  if (out.size() != static_cast<std::size_t>(x.rows())) {
    throw Error(ErrorCode::kWidthMismatch, "output buffer does not match the row count");
  }
  PredictRows(x, out);
}

Eigen::VectorXd Predictor::Predict(const RowMatrix& x) const {
  Eigen::VectorXd out(x.rows());
  PredictBatch(x, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double Predictor::PredictOne(std::span<const double> row) const {
  RowMatrix x = Eigen::Map<const RowMatrix>(row.data(), 1, static_cast<Eigen::Index>(row.size()));
  double out = 0.0;
  PredictBatch(x, std::span<double>(&out, 1));
  return out;
}

LinearModel::LinearModel(std::vector<std::string> names, double intercept, Eigen::VectorXd weights)
    : Predictor(std::move(names)), intercept_(intercept), weights_(std::move(weights)) {}

std::string LinearModel::descriptor() const { return "linear"; }

void LinearModel::PredictRows(const RowMatrix& x, std::span<double> out) const {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = intercept_ + x.row(i).dot(weights_);
  }
}

LogisticModel::LogisticModel(std::vector<std::string> names, double intercept,
                             Eigen::VectorXd weights, std::vector<double> loss_history)
    : Predictor(std::move(names)),
      intercept_(intercept),
      weights_(std::move(weights)),
      loss_history_(std::move(loss_history)) {}

std::string LogisticModel::descriptor() const { return "logistic"; }

void LogisticModel::PredictRows(const RowMatrix& x, std::span<double> out) const {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = intercept_ + x.row(i).dot(weights_);
  }
}

RegressionTree::RegressionTree(std::vector<std::string> names, std::vector<TreeNode> nodes)
    : Predictor(std::move(names)), nodes_(std::move(nodes)) {}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

double RegressionTree::PredictRow(const double* row) const {
  const TreeNode* node = nodes_.data();
  while (node->feature >= 0) {
    node = &nodes_[static_cast<std::size_t>(row[node->feature] <= node->threshold ? node->left
                                                                                  : node->right)];
  }
  return node->value;
}

std::string RegressionTree::descriptor() const {
  return "tree(nodes=" + std::to_string(nodes_.size()) + ")";
}

void RegressionTree::PredictRows(const RowMatrix& x, std::span<double> out) const {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = PredictRow(x.row(i).data());
  }
}

Forest::Forest(std::vector<std::string> names, std::vector<RegressionTree> trees)
    : Predictor(std::move(names)), trees_(std::move(trees)) {}

std::string Forest::descriptor() const {
  return "forest(trees=" + std::to_string(trees_.size()) + ")";
}

void Forest::PredictRows(const RowMatrix& x, std::span<double> out) const {
  const double scale = 1.0 / static_cast<double>(trees_.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = x.row(i).data();
    double total = 0.0;
    for (const auto& tree : trees_) total += tree.PredictRow(row);
    out[static_cast<std::size_t>(i)] = total * scale;
  }
}

KnnModel::KnnModel(std::vector<std::string> names, RowMatrix standardized, Eigen::VectorXd target,
                   Eigen::VectorXd means, Eigen::VectorXd scales, std::size_t k)
    : Predictor(std::move(names)),
      train_(std::move(standardized)),
      target_(std::move(target)),
      means_(std::move(means)),
      scales_(std::move(scales)),
      k_(k) {}

std::string KnnModel::descriptor() const { return "knn(k=" + std::to_string(k_) + ")"; }

void KnnModel::PredictRows(const RowMatrix& x, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(train_.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  Eigen::RowVectorXd query(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    query = (x.row(i) - means_.transpose()).cwiseQuotient(scales_.transpose());
    for (std::size_t r = 0; r < n; ++r) {
      dist[r] = {(train_.row(static_cast<Eigen::Index>(r)) - query).squaredNorm(), r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    double total = 0.0;
    for (std::size_t r = 0; r < k_; ++r) total += target_[static_cast<Eigen::Index>(dist[r].second)];
    out[static_cast<std::size_t>(i)] = total / static_cast<double>(k_);
  }
}

// ---------------------------------------------------------------------------
// Fitting

std::shared_ptr<const LinearModel> FitLinear(const DataMatrix& data, std::string_view target,
                                             double ridge_eps) {
  if (!(ridge_eps >= 0.0) || !std::isfinite(ridge_eps)) {
    throw Error(ErrorCode::kInvalidArgument, "ridge_eps must be finite and >= 0");
  }
  auto [features, y] = SplitTarget(data, target);
  const Eigen::VectorXd means = features.values().colwise().mean().transpose();
  const double y_mean = y.mean();
  const Eigen::MatrixXd centered = features.values().rowwise() - means.transpose();
  Eigen::MatrixXd gram = centered.transpose() * centered;
  gram.diagonal().array() += ridge_eps;
  Eigen::VectorXd rhs = centered.transpose() * (y.array() - y_mean).matrix();

  // An all-constant design has a zero Gram; every slope is then 0.
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(gram.rows());
  if (gram.diagonal().maxCoeff() > 0.0) {
    auto solved = SolvePartialPivot(gram, rhs, kDesignPivotRatio);
    if (solved.singular) {
      throw Error(ErrorCode::kSingularDesign,
                  "normal equations are singular near column '" +
                      features.names()[solved.weakest_row] + "'; set ridge_eps > 0 or drop it");
    }
    weights = std::move(solved.solution);
  }
  const double intercept = y_mean - means.dot(weights);
  return std::make_shared<const LinearModel>(FeatureNames(features), intercept, std::move(weights));
}

std::shared_ptr<const LogisticModel> FitLogistic(const DataMatrix& data, std::string_view target,
                                                 double learning_rate, int epochs) {
  if (!(learning_rate > 0.0) || epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "logistic needs lr > 0 and epochs >= 1");
  }
  auto [features, y] = SplitTarget(data, target);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw Error(ErrorCode::kNonBinaryTarget,
                  "target '" + std::string(target) + "' holds value " + FormatDouble(y[i]));
    }
  }
  // Train on z-scored features, then fold the scaling back into the weights.
  const Eigen::VectorXd means = features.values().colwise().mean().transpose();
  const auto n = static_cast<double>(features.rows());
  Eigen::MatrixXd z = features.values().rowwise() - means.transpose();
  Eigen::VectorXd scales = (z.colwise().squaredNorm().transpose() / n).cwiseSqrt();
  for (Eigen::Index j = 0; j < scales.size(); ++j) {
    if (!(scales[j] > 0.0)) scales[j] = 1.0;
  }
  z = z.array().rowwise() / scales.transpose().array();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
  double b = 0.0;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(epochs) + 1);
  Eigen::VectorXd logits = Eigen::VectorXd::Constant(z.rows(), b);
  history.push_back(LogLoss(logits, y));
  for (int e = 0; e < epochs; ++e) {
    const Eigen::VectorXd residual =
        (1.0 / (1.0 + (-logits.array()).exp())).matrix() - y;
    w -= learning_rate * (z.transpose() * residual) / n;
    b -= learning_rate * residual.mean();
    logits = (z * w).array() + b;
    history.push_back(LogLoss(logits, y));
  }
  const Eigen::VectorXd raw = w.cwiseQuotient(scales);
  const double intercept = b - means.dot(raw);
  return std::make_shared<const LogisticModel>(FeatureNames(features), intercept, raw,
                                               std::move(history));
}

namespace {

RegressionTree FitTreeOnRows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::vector<std::size_t> rows, const TreeParams& params,
                             std::vector<std::string> names) {
  TreeBuilder builder(x, y, params);
  return RegressionTree(std::move(names), builder.Build(std::move(rows)));
}

}  // namespace

std::shared_ptr<const RegressionTree> FitTree(const DataMatrix& data, std::string_view target,
                                              const TreeParams& params) {
  ValidateTreeParams(params);
  auto [features, y] = SplitTarget(data, target);
  const Eigen::MatrixXd x = features.values();
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return std::make_shared<const RegressionTree>(
      FitTreeOnRows(x, y, std::move(rows), params, FeatureNames(features)));
}

std::uint64_t ForestTreeSeed(std::uint64_t forest_seed, std::size_t tree) {
  return MixKeys(DeriveSeed(forest_seed, "tree"), tree);
}

std::shared_ptr<const Forest> FitForest(const DataMatrix& data, std::string_view target,
                                        const ForestParams& params) {
  ValidateTreeParams(params.tree);
  if (params.n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  if (!(params.bag_fraction > 0.0 && params.bag_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bag_fraction must be in (0, 1]");
  }
  auto [features, y] = SplitTarget(data, target);
  const Eigen::MatrixXd x = features.values();
  const std::size_t n = features.rows();
  const auto bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.bag_fraction * static_cast<double>(n))));

  const auto fit_one = [&](std::size_t t) {
    CounterStream rng(MixKeys(params.seed, t));
    std::vector<std::size_t> bag;
    bag.reserve(bag_size);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < bag_size; ++i) bag.push_back(rng.UniformIndex(n));
    } else {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      for (std::size_t i = 0; i < bag_size; ++i) {
        std::swap(all[i], all[i + rng.UniformIndex(n - i)]);
      }
      bag.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(bag_size));
    }
    std::sort(bag.begin(), bag.end());
    TreeParams tree = params.tree;
    tree.seed = ForestTreeSeed(params.seed, t);
    return FitTreeOnRows(x, y, std::move(bag), tree, features.names());
  };

  const auto count = static_cast<std::size_t>(params.n_trees);
  std::vector<std::optional<RegressionTree>> trees(count);
  const auto workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(params.workers, 1)),
                                               1, count);
  if (workers == 1) {
    for (std::size_t t = 0; t < count; ++t) trees[t].emplace(fit_one(t));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < count; t = next++) trees[t].emplace(fit_one(t));
      });
    }
  }
  std::vector<RegressionTree> out;
  out.reserve(count);
  for (auto& tree : trees) out.push_back(std::move(*tree));
  return std::make_shared<const Forest>(FeatureNames(features), std::move(out));
}

std::shared_ptr<const KnnModel> FitKnn(const DataMatrix& data, std::string_view target,
                                       std::size_t k) {
  auto [features, y] = SplitTarget(data, target);
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (k > features.rows()) {
    throw Error(ErrorCode::kKTooLarge, "k = " + std::to_string(k) + " exceeds " +
                                           std::to_string(features.rows()) + " training rows");
  }
  const Eigen::VectorXd means = features.values().colwise().mean().transpose();
  RowMatrix centered = features.values().rowwise() - means.transpose();
  const auto n = static_cast<double>(features.rows());
  Eigen::VectorXd scales = (centered.colwise().squaredNorm().transpose() / (n - 1.0)).cwiseSqrt();
  for (Eigen::Index j = 0; j < scales.size(); ++j) {
    if (!(scales[j] > 0.0)) scales[j] = 1.0;
  }
  RowMatrix standardized = centered.array().rowwise() / scales.transpose().array();
  return std::make_shared<const KnnModel>(FeatureNames(features), std::move(standardized),
                                          std::move(y), means, scales, k);
}

PredictorHandle FitModel(const ModelSpec& spec, const DataMatrix& data, std::string_view target) {
  return std::visit(
      [&](const auto& p) -> PredictorHandle {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          return FitLinear(data, target, p.ridge_eps);
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          return FitLogistic(data, target, p.learning_rate, p.epochs);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return FitTree(data, target, p);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          return FitForest(data, target, p);
        } else {
          return FitKnn(data, target, p.k);
        }
      },
      spec.params);
}

std::string_view FamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kLinear: return "linear";
    case ModelFamily::kLogistic: return "logistic";
    case ModelFamily::kTree: return "tree";
    case ModelFamily::kForest: return "forest";
    case ModelFamily::kKnn: return "knn";
  }
  return "unknown";
}

ModelSpec ParseModelSpec(std::string_view family, std::span<const std::string> options) {
  ModelSpec spec;
  if (family == "linear") {
    spec = {ModelFamily::kLinear, LinearParams{}};
  } else if (family == "logistic") {
    spec = {ModelFamily::kLogistic, LogisticParams{}};
  } else if (family == "tree") {
    spec = {ModelFamily::kTree, TreeParams{}};
  } else if (family == "forest") {
    spec = {ModelFamily::kForest, ForestParams{}};
  } else if (family == "knn") {
    spec = {ModelFamily::kKnn, KnnParams{}};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown model family '" + std::string(family) +
                                                 "' (linear, logistic, tree, forest, knn)");
  }
  for (const std::string& option : options) {
    const auto eq = option.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "model option '" + option + "' is not KEY=VALUE");
    }
    const std::string_view key = std::string_view(option).substr(0, eq);
    const std::string_view value = std::string_view(option).substr(eq + 1);
    bool known = true;
    std::visit(
        [&](auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, LinearParams>) {
            if (key == "ridge_eps") p.ridge_eps = ParseNumber<double>(key, value);
            else known = false;
          } else if constexpr (std::is_same_v<P, LogisticParams>) {
            if (key == "lr") p.learning_rate = ParseNumber<double>(key, value);
            else if (key == "epochs") p.epochs = ParseNumber<int>(key, value);
            else known = false;
          } else if constexpr (std::is_same_v<P, TreeParams>) {
            if (key == "seed") p.seed = ParseNumber<std::uint64_t>(key, value);
            else known = ApplyTreeOption(p, key, value);
          } else if constexpr (std::is_same_v<P, ForestParams>) {
            if (key == "n_trees") p.n_trees = ParseNumber<int>(key, value);
            else if (key == "bag_fraction") p.bag_fraction = ParseNumber<double>(key, value);
            else if (key == "bootstrap") p.bootstrap = ParseBool(key, value);
            else if (key == "seed") p.seed = ParseNumber<std::uint64_t>(key, value);
            else if (key == "workers") p.workers = ParseNumber<int>(key, value);
            else known = ApplyTreeOption(p.tree, key, value);
          } else {
            if (key == "k") p.k = ParseNumber<std::size_t>(key, value);
            else known = false;
          }
        },
        spec.params);
    if (!known) {
      throw Error(ErrorCode::kInvalidArgument, "model family '" + std::string(family) +
                                                   "' has no option '" + std::string(key) + "'");
    }
  }
  return spec;
}

std::string DescribeModelSpec(const ModelSpec& spec) {
  std::ostringstream out;
  out << FamilyName(spec.family) << '(';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        const auto tree = [&](const TreeParams& t) {
          out << "max_depth=" << t.max_depth << ",min_samples_leaf=" << t.min_samples_leaf
              << ",max_features=" << t.max_features;
        };
        if constexpr (std::is_same_v<P, LinearParams>) {
          out << "ridge_eps=" << FormatDouble(p.ridge_eps);
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          out << "lr=" << FormatDouble(p.learning_rate) << ",epochs=" << p.epochs;
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          tree(p);
          out << ",seed=" << p.seed;
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          out << "n_trees=" << p.n_trees << ",bag_fraction=" << FormatDouble(p.bag_fraction)
              << ",bootstrap=" << (p.bootstrap ? 1 : 0) << ",seed=" << p.seed << ',';
          tree(p.tree);
        } else {
          out << "k=" << p.k;
        }
      },
      spec.params);
  out << ')';
  return out.str();
}

}  // namespace mccshap
