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
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mccshap/error.hpp"
#include "test_util.hpp"

namespace mccshap {
namespace {

using testing::CodeOf;

DataMatrix FromColumns(const std::vector<std::vector<double>>& cols,
                       std::vector<std::string> names) {
  RowMatrix v(static_cast<Eigen::Index>(cols[0].size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < cols[j].size(); ++i) {
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
  }
  return DataMatrix(std::move(v), std::move(names));
}

// x1, x2 ~ U(-2, 2); y = f(x1, x2) + noise_sd * N(0, 1).
template <typename F>
DataMatrix Sample(std::size_t n, std::uint64_t seed, double noise_sd, F f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = u(rng);
    x2[i] = u(rng);
    y[i] = f(x1[i], x2[i]) + noise_sd * noise(rng);
  }
  return FromColumns({x1, x2, y}, {"x1", "x2", "y"});
}

double Mse(const Predictor& model, const DataMatrix& data) {
  const TargetSplit split = SplitTarget(data, "y");
  return (model.Predict(split.features.values()) - split.target).squaredNorm() /
         static_cast<double>(data.rows());
}

bool SamePredictions(const Predictor& a, const Predictor& b, const RowMatrix& x) {
  const Eigen::VectorXd pa = a.Predict(x);
  const Eigen::VectorXd pb = b.Predict(x);
  for (Eigen::Index i = 0; i < pa.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(pa[i]) != std::bit_cast<std::uint64_t>(pb[i])) return false;
  }
  return true;
}

TEST(Linear, RecoversExactCoefficients) {
  const DataMatrix data = Sample(50, 1, 0.0, [](double a, double b) { return 2 * a - 3 * b + 1; });
  const auto model = FitLinear(data, "y", 0.0);
  EXPECT_NEAR(model->weights()[0], 2.0, 1e-8);
  EXPECT_NEAR(model->weights()[1], -3.0, 1e-8);
  EXPECT_NEAR(model->intercept(), 1.0, 1e-8);
  EXPECT_EQ(model->output_kind(), OutputKind::kRegressionScore);
}

TEST(Linear, ConstantTarget) {
  const DataMatrix data = Sample(30, 2, 0.0, [](double, double) { return 5.0; });
  const auto model = FitLinear(data, "y", 0.0);
  EXPECT_NEAR(model->intercept(), 5.0, 1e-10);
  EXPECT_NEAR(model->weights().cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(Linear, IdenticalColumnsAreSingularWithoutRidge) {
  const DataMatrix base = Sample(30, 3, 0.1, [](double a, double) { return a; });
  const DataMatrix data = base.with_column("x1_copy", FeatureKind::kNumeric, base.column(0));
  EXPECT_EQ(CodeOf([&] { FitLinear(data, "y", 0.0); }), ErrorCode::kSingularDesign);
  const auto ridged = FitLinear(data, "y", 1.0);
  // Ridge splits the weight evenly between exact copies.
  EXPECT_NEAR(ridged->weights()[0], ridged->weights()[2], 1e-10);
}

TEST(Linear, RidgeShrinksSlopes) {
  const DataMatrix data = Sample(40, 4, 0.5, [](double a, double b) { return 3 * a + b; });
  const double ols = FitLinear(data, "y", 0.0)->weights().norm();
  const double ridge = FitLinear(data, "y", 50.0)->weights().norm();
  EXPECT_LT(ridge, ols);
}

TEST(Logistic, SeparableLossStrictlyDecreases) {
  std::vector<double> x, y;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    x.push_back(i * 0.3);
    y.push_back(i > 0 ? 1.0 : 0.0);
  }
  const auto model = FitLogistic(FromColumns({x, y}, {"x", "y"}), "y", 0.1, 200);
  const auto& loss = model->loss_history();
  ASSERT_EQ(loss.size(), 201u);
  for (std::size_t e = 1; e < loss.size(); ++e) EXPECT_LT(loss[e], loss[e - 1]);
  EXPECT_GT(model->weights()[0], 0.0);
  EXPECT_EQ(model->output_kind(), OutputKind::kClassificationLogit);
}

TEST(Logistic, AllZeroTargetDrivesInterceptNegative) {
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(std::sin(i * 0.7));
    y.push_back(0.0);
  }
  const auto model = FitLogistic(FromColumns({x, y}, {"x", "y"}), "y", 0.1, 500);
  EXPECT_LE(model->intercept(), -2.0);
  const auto& loss = model->loss_history();
  for (std::size_t e = 1; e < loss.size(); ++e) EXPECT_LT(loss[e], loss[e - 1]);
}

TEST(Logistic, NonBinaryTarget) {
  const DataMatrix data = FromColumns({{1, 2, 3}, {0, 1, 2}}, {"x", "y"});
  EXPECT_EQ(CodeOf([&] { FitLogistic(data, "y", 0.1, 10); }), ErrorCode::kNonBinaryTarget);
}

TEST(Tree, DepthOneSplitsAtSignChange) {
  std::vector<double> x, y;
  for (int i = -10; i < 10; ++i) {
    x.push_back(i + 0.5);
    y.push_back(i >= 0 ? 1.0 : 0.0);
  }
  TreeParams p;
  p.max_depth = 1;
  p.min_samples_leaf = 1;
  const auto tree = FitTree(FromColumns({x, y}, {"x", "y"}), "y", p);
  const auto& nodes = tree->nodes();
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[0].feature, 0);
  EXPECT_GT(nodes[0].threshold, -0.5);
  EXPECT_LT(nodes[0].threshold, 0.5);
  EXPECT_EQ(nodes[static_cast<std::size_t>(nodes[0].left)].value, 0.0);
  EXPECT_EQ(nodes[static_cast<std::size_t>(nodes[0].right)].value, 1.0);
}

TEST(Tree, MinLeafEqualToRowsGivesSingleLeaf) {
  const DataMatrix data = Sample(25, 5, 1.0, [](double a, double) { return a; });
  TreeParams p;
  p.min_samples_leaf = 25;
  const auto tree = FitTree(data, "y", p);
  EXPECT_EQ(tree->leaf_count(), 1u);
  EXPECT_NEAR(tree->nodes()[0].value, SplitTarget(data, "y").target.mean(), 1e-12);
}

TEST(Tree, DeeperTreeFitsQuadraticBetter) {
  const DataMatrix data = Sample(400, 6, 0.1, [](double a, double) { return a * a; });
  TreeParams shallow;
  shallow.max_depth = 1;
  TreeParams deep;
  deep.max_depth = 6;
  EXPECT_LT(Mse(*FitTree(data, "y", deep), data), Mse(*FitTree(data, "y", shallow), data));
}

TEST(Tree, RespectsMinSamplesLeaf) {
  const DataMatrix data = Sample(200, 7, 0.3, [](double a, double b) { return a + b * b; });
  TreeParams p;
  p.min_samples_leaf = 12;
  const auto tree = FitTree(data, "y", p);
  const RowMatrix x = SplitTarget(data, "y").features.values();
  std::vector<int> hits(tree->nodes().size(), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int node = 0;
    while (tree->nodes()[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& t = tree->nodes()[static_cast<std::size_t>(node)];
      node = x(i, t.feature) <= t.threshold ? t.left : t.right;
    }
    ++hits[static_cast<std::size_t>(node)];
  }
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (tree->nodes()[k].feature < 0) EXPECT_GE(hits[k], 12);
  }
}

TEST(Tree, RejectsBadParams) {
  const DataMatrix data = Sample(20, 8, 0.1, [](double a, double) { return a; });
  TreeParams p;
  p.max_depth = 0;
  EXPECT_EQ(CodeOf([&] { FitTree(data, "y", p); }), ErrorCode::kInvalidArgument);
}

TEST(Forest, IdentityBagEqualsSingleTree) {
  const DataMatrix data = Sample(150, 9, 0.2, [](double a, double b) { return a * b; });
  ForestParams fp;
  fp.n_trees = 1;
  fp.bag_fraction = 1.0;
  fp.bootstrap = false;
  fp.seed = 3;
  const auto forest = FitForest(data, "y", fp);
  TreeParams tp = fp.tree;
  tp.seed = ForestTreeSeed(fp.seed, 0);
  const auto tree = FitTree(data, "y", tp);
  EXPECT_TRUE(SamePredictions(*forest, *tree, SplitTarget(data, "y").features.values()));
}

TEST(Forest, DeterministicAcrossRunsAndWorkers) {
  const DataMatrix data = Sample(120, 10, 0.2, [](double a, double b) { return a - b * b; });
  ForestParams fp;
  fp.n_trees = 12;
  const auto a = FitForest(data, "y", fp);
  const auto b = FitForest(data, "y", fp);
  fp.workers = 3;
  const auto c = FitForest(data, "y", fp);
  const RowMatrix x = SplitTarget(data, "y").features.values();
  EXPECT_TRUE(SamePredictions(*a, *b, x));
  EXPECT_TRUE(SamePredictions(*a, *c, x));
  fp.seed = 8;
  EXPECT_FALSE(SamePredictions(*a, *FitForest(data, "y", fp), x));
}

TEST(Forest, BeatsSingleTreeOnHeldOutData) {
  const auto f = [](double a, double b) { return std::sin(2 * a) + b * std::abs(b); };
  const DataMatrix train = Sample(400, 11, 0.5, f);
  const DataMatrix test = Sample(400, 12, 0.5, f);
  ForestParams fp;
  fp.n_trees = 50;
  EXPECT_LE(Mse(*FitForest(train, "y", fp), test), Mse(*FitTree(train, "y", fp.tree), test));
}

TEST(Knn, ExactMatchAndGlobalMean) {
  const DataMatrix data = Sample(30, 13, 1.0, [](double a, double b) { return a + b; });
  const TargetSplit split = SplitTarget(data, "y");
  const auto one = FitKnn(data, "y", 1);
  EXPECT_DOUBLE_EQ(one->PredictOne(split.features.row(4)), split.target[4]);
  const auto all = FitKnn(data, "y", 30);
  EXPECT_NEAR(all->PredictOne(split.features.row(0)), split.target.mean(), 1e-12);
  EXPECT_EQ(CodeOf([&] { FitKnn(data, "y", 31); }), ErrorCode::kKTooLarge);
}

TEST(Knn, MatchesBruteForceNeighbours) {
  const DataMatrix data = FromColumns(
      {{0, 1, 3, 6, 10}, {5, 3, 4, 0, 2}, {1, 2, 4, 8, 16}}, {"a", "b", "y"});
  const auto model = FitKnn(data, "y", 3);
  // Oracle: z-score with sample sds, sort all distances.
  const TargetSplit split = SplitTarget(data, "y");
  const RowMatrix& x = split.features.values();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((x.rowwise() - mean).colwise().squaredNorm() / 4.0).cwiseSqrt();
  const double query[] = {4.0, 1.0};
  std::vector<std::pair<double, double>> dist;
  for (Eigen::Index i = 0; i < 5; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double diff = (query[j] - x(i, j)) / sd[j];
      d += diff * diff;
    }
    dist.emplace_back(d, split.target[i]);
  }
  std::sort(dist.begin(), dist.end());
  const double expected = (dist[0].second + dist[1].second + dist[2].second) / 3.0;
  EXPECT_NEAR(model->PredictOne(query), expected, 1e-12);
}

TEST(Predictor, BatchEqualsRowByRowAndIsPure) {
  const DataMatrix data = Sample(60, 14, 0.3, [](double a, double b) { return a * a - b; });
  const RowMatrix x = SplitTarget(data, "y").features.values();
  const std::vector<PredictorHandle> models = {
      FitLinear(data, "y", 0.0), FitTree(data, "y", TreeParams{}),
      FitForest(data, "y", ForestParams{.n_trees = 5}), FitKnn(data, "y", 4)};
  for (const auto& m : models) {
    const Eigen::VectorXd batch = m->Predict(x);
    EXPECT_TRUE(SamePredictions(*m, *m, x));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(batch[i]),
                std::bit_cast<std::uint64_t>(
                    m->PredictOne(std::span<const double>(x.row(i).data(), 2))));
    }
  }
  std::vector<double> out(3);
  EXPECT_EQ(CodeOf([&] { models[0]->PredictBatch(RowMatrix::Zero(3, 5), out); }),
            ErrorCode::kWidthMismatch);
}

TEST(ModelSpec, ParsesFamiliesAndOptions) {
  const std::vector<std::string> opts = {"n_trees=7", "seed=9", "max_depth=3", "bootstrap=false"};
  const ModelSpec spec = ParseModelSpec("forest", opts);
  const auto& p = std::get<ForestParams>(spec.params);
  EXPECT_EQ(p.n_trees, 7);
  EXPECT_EQ(p.seed, 9u);
  EXPECT_EQ(p.tree.max_depth, 3);
  EXPECT_FALSE(p.bootstrap);
  EXPECT_EQ(FamilyName(spec.family), "forest");
  EXPECT_NE(DescribeModelSpec(spec).find("n_trees=7"), std::string::npos);

  const std::vector<std::string> bad_key = {"depth=3"};
  EXPECT_EQ(CodeOf([&] { ParseModelSpec("tree", bad_key); }), ErrorCode::kInvalidArgument);
  const std::vector<std::string> bad_value = {"k=three"};
  EXPECT_EQ(CodeOf([&] { ParseModelSpec("knn", bad_value); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { ParseModelSpec("svm", {}); }), ErrorCode::kInvalidArgument);
}

TEST(ModelSpec, FitModelDispatches) {
  const DataMatrix data = Sample(40, 15, 0.1, [](double a, double) { return a; });
  const std::vector<std::string> none;
  for (const char* family : {"linear", "tree", "forest", "knn"}) {
    const PredictorHandle m = FitModel(ParseModelSpec(family, none), data, "y");
    EXPECT_EQ(m->width(), 2u);
    EXPECT_EQ(m->feature_names(), (std::vector<std::string>{"x1", "x2"}));
  }
}

}  // namespace
}  // namespace mccshap
