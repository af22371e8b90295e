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

// Built-in predictors behind a single batch-prediction interface. Every
// fitted model is immutable; PredictBatch is safe to call concurrently.

#ifndef MCCSHAP_MODELS_HPP_
#define MCCSHAP_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mccshap/dataset.hpp"

namespace mccshap {

enum class OutputKind { kRegressionScore, kClassificationLogit };

class Predictor {
 public:
  virtual ~Predictor() = default;

  // out.size() must equal x.rows(); x.cols() must equal width().
  void PredictBatch(const RowMatrix& x, std::span<double> out) const;
  Eigen::VectorXd Predict(const RowMatrix& x) const;
  double PredictOne(std::span<const double> row) const;

  virtual OutputKind output_kind() const = 0;
  virtual std::string descriptor() const = 0;

  std::size_t width() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

 protected:
  explicit Predictor(std::vector<std::string> feature_names)
      : feature_names_(std::move(feature_names)) {}

  virtual void PredictRows(const RowMatrix& x, std::span<double> out) const = 0;

 private:
  std::vector<std::string> feature_names_;
};

using PredictorHandle = std::shared_ptr<const Predictor>;

class LinearModel final : public Predictor {
 public:
  LinearModel(std::vector<std::string> names, double intercept, Eigen::VectorXd weights);

  double intercept() const { return intercept_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  OutputKind output_kind() const override { return OutputKind::kRegressionScore; }
  std::string descriptor() const override;

 protected:
  void PredictRows(const RowMatrix& x, std::span<double> out) const override;

 private:
  double intercept_;
  Eigen::VectorXd weights_;
};

// Returns logits (pre-sigmoid scores).
class LogisticModel final : public Predictor {
 public:
  LogisticModel(std::vector<std::string> names, double intercept, Eigen::VectorXd weights,
                std::vector<double> loss_history);

  double intercept() const { return intercept_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  // Mean log-loss before training followed by the loss after each epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }
  OutputKind output_kind() const override { return OutputKind::kClassificationLogit; }
  std::string descriptor() const override;

 protected:
  void PredictRows(const RowMatrix& x, std::span<double> out) const override;

 private:
  double intercept_;
  Eigen::VectorXd weights_;
  std::vector<double> loss_history_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class RegressionTree final : public Predictor {
 public:
  RegressionTree(std::vector<std::string> names, std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  double PredictRow(const double* row) const;
  OutputKind output_kind() const override { return OutputKind::kRegressionScore; }
  std::string descriptor() const override;

 protected:
  void PredictRows(const RowMatrix& x, std::span<double> out) const override;

 private:
  std::vector<TreeNode> nodes_;
};

class Forest final : public Predictor {
 public:
  Forest(std::vector<std::string> names, std::vector<RegressionTree> trees);

  const std::vector<RegressionTree>& trees() const { return trees_; }
  OutputKind output_kind() const override { return OutputKind::kRegressionScore; }
  std::string descriptor() const override;

 protected:
  void PredictRows(const RowMatrix& x, std::span<double> out) const override;

 private:
  std::vector<RegressionTree> trees_;
};

// Mean target of the k nearest training rows, Euclidean distance on z-scored
// features (training means and standard deviations).
class KnnModel final : public Predictor {
 public:
  KnnModel(std::vector<std::string> names, RowMatrix standardized, Eigen::VectorXd target,
           Eigen::VectorXd means, Eigen::VectorXd scales, std::size_t k);

  std::size_t k() const { return k_; }
  OutputKind output_kind() const override { return OutputKind::kRegressionScore; }
  std::string descriptor() const override;

 protected:
  void PredictRows(const RowMatrix& x, std::span<double> out) const override;

 private:
  RowMatrix train_;
  Eigen::VectorXd target_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  std::size_t k_;
};

struct LinearParams {
  double ridge_eps = 0.0;
};

struct LogisticParams {
  double learning_rate = 0.1;
  int epochs = 500;
};

struct TreeParams {
  int max_depth = 8;
  int min_samples_leaf = 5;
  // Features examined per split; 0 means all.
  int max_features = 0;
  std::uint64_t seed = 7;
};

struct ForestParams {
  int n_trees = 100;
  double bag_fraction = 1.0;
  // Sample with replacement (bootstrap) or without.
  bool bootstrap = true;
  std::uint64_t seed = 7;
  TreeParams tree;
  int workers = 1;
};

struct KnnParams {
  std::size_t k = 5;
};

enum class ModelFamily { kLinear, kLogistic, kTree, kForest, kKnn };

struct ModelSpec {
  ModelFamily family = ModelFamily::kForest;
  std::variant<LinearParams, LogisticParams, TreeParams, ForestParams, KnnParams> params =
      ForestParams{};
};

std::string_view FamilyName(ModelFamily family);

// family is one of linear|logistic|tree|forest|knn; options are KEY=VALUE.
ModelSpec ParseModelSpec(std::string_view family, std::span<const std::string> options);
std::string DescribeModelSpec(const ModelSpec& spec);

// Fitting functions use every column except `target` as a predictor.
std::shared_ptr<const LinearModel> FitLinear(const DataMatrix& data, std::string_view target,
                                             double ridge_eps);
std::shared_ptr<const LogisticModel> FitLogistic(const DataMatrix& data, std::string_view target,
                                                 double learning_rate, int epochs);
std::shared_ptr<const RegressionTree> FitTree(const DataMatrix& data, std::string_view target,
                                              const TreeParams& params);
std::shared_ptr<const Forest> FitForest(const DataMatrix& data, std::string_view target,
                                        const ForestParams& params);
std::shared_ptr<const KnnModel> FitKnn(const DataMatrix& data, std::string_view target,
                                       std::size_t k);

// Split-order seed used for tree `tree` of a forest fitted with `forest_seed`.
std::uint64_t ForestTreeSeed(std::uint64_t forest_seed, std::size_t tree);

PredictorHandle FitModel(const ModelSpec& spec, const DataMatrix& data, std::string_view target);

}  // namespace mccshap

#endif  // MCCSHAP_MODELS_HPP_
