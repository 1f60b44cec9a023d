// Copyright 2026 The wgaknn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wgaknn/trainer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "test_util.h"
#include "wgaknn/error.h"

namespace wgaknn {
namespace {

LinearModel random_model(std::size_t d, int classes, std::uint64_t seed,
                         double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  LinearModel m = LinearModel::zeros(d, classes);
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) m.bias(i) = normal(rng);
  return m;
}

std::vector<double> random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::vector<double> w(n);
  for (auto& v : w) v = u(rng);
  return w;
}

// Largest relative error between the analytic gradient and central
// differences with step h, scaled by max(|analytic|, |numeric|, 1e-3).
double gradient_error(const SmoothObjective& f, LinearModel m, double h) {
  LinearModel grad = LinearModel::zeros(m.dim(), m.num_classes());
  f.value_and_gradient(m, grad);
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = f.value(m);
    param = saved - h;
    const double down = f.value(m);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    check(m.weights.data()[i], grad.weights.data()[i]);
  }
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) check(m.bias(i), grad.bias(i));
  return worst;
}

TEST(SmoothObjective, GradientMatchesFiniteDifferences) {
  const std::vector<LossSpec> losses = {
      LossSpec::cross_entropy(), LossSpec::alpha_loss(0.5),
      LossSpec::alpha_loss(1 - 1e-6), LossSpec::alpha_loss(1 + 1e-6),
      LossSpec::alpha_loss(2.0)};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureMatrix x = testing::random_features(10, 4, seed);
    const LabelVector y = testing::random_labels(10, 3, seed);
    const auto w = random_weights(10, seed);
    for (const LossSpec& loss : losses) {
      const SmoothObjective plain(x, y, 3, loss);
      const SmoothObjective weighted(x, y, 3, loss, w);
      const LinearModel m = random_model(4, 3, seed + 7);
      EXPECT_LE(gradient_error(plain, m, 1e-5), 1e-5) << seed << " " << loss.alpha;
      EXPECT_LE(gradient_error(weighted, m, 1e-5), 1e-5) << seed << " " << loss.alpha;
    }
  }
}

TEST(SmoothObjective, EqualWeightsMatchNoWeightsExactly) {
  const FeatureMatrix x = testing::random_features(30, 3, 1);
  const LabelVector y = testing::random_labels(30, 2, 1);
  const LinearModel m = random_model(3, 2, 2);
  const SmoothObjective plain(x, y, 2, LossSpec::cross_entropy());
  for (double c : {1.0, 3.5, 1e-3, 1e6}) {
    const SmoothObjective scaled(x, y, 2, LossSpec::cross_entropy(),
                                 std::vector<double>(30, c));
    EXPECT_EQ(plain.value(m), scaled.value(m));
    EXPECT_EQ(scaled.weight_sum(), 30.0);
  }
}

TEST(SmoothObjective, CrossEntropyAtZeroIsLogClasses) {
  const FeatureMatrix x = testing::random_features(12, 2, 1);
  const LabelVector y = testing::random_labels(12, 4, 1);
  const SmoothObjective f(x, y, 4, LossSpec::cross_entropy());
  EXPECT_NEAR(f.value(LinearModel::zeros(2, 4)), std::log(4.0), 1e-15);
}

TEST(Train, SeparableTwoPoints) {
  FeatureMatrix x(2, 1);
  x << -1, 1;
  const LabelVector y = {0, 1};
  const LinearModel m = train(x, y, 2, {});
  EXPECT_EQ(predict(m, x), y);
}

TEST(Train, HugePenaltyZerosWeightsAndPredictsPrior) {
  const FeatureMatrix x = testing::random_features(20, 3, 4);
  LabelVector y(20, 0);
  for (std::size_t i = 0; i < 6; ++i) y[i] = 1;
  TrainConfig cfg;
  cfg.l1_penalty = 1e6;
  const LinearModel m = train(x, y, 2, cfg);
  EXPECT_EQ(m.nonzero_weights(), 0u);
  EXPECT_EQ(predict(m, x), LabelVector(20, 0));
  // The bias alone fits the empirical prior: softmax(b) = (14/20, 6/20).
  EXPECT_NEAR(m.bias(0) - m.bias(1), std::log(14.0 / 6.0), 1e-3);
}

TEST(Train, ObjectiveNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const EmbeddingDataset ds = testing::random_dataset(80, 6, 2 + seed % 3, seed);
    for (double c : {0.0, 1e-3, 0.05}) {
      for (const LossSpec& loss : {LossSpec::cross_entropy(), LossSpec::alpha_loss(2.0)}) {
        TrainConfig cfg;
        cfg.l1_penalty = c;
        cfg.loss = loss;
        cfg.max_iters = 300;
        if (seed % 2) cfg.example_weights = random_weights(80, seed);
        TrainTrace trace;
        train(ds, cfg, &trace);
        ASSERT_GE(trace.objective.size(), 2u);
        for (std::size_t i = 1; i < trace.objective.size(); ++i) {
          EXPECT_LE(trace.objective[i], trace.objective[i - 1]) << seed << " " << i;
        }
      }
    }
  }
}

// Holds on these instances only: at exact optima the path can re-admit a
// coordinate as c grows (binary seed 10, multinomial seeds 2 and 3).
TEST(Train, SparsityShrinksAlongPenaltyGrid) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingDataset ds = testing::random_dataset(200, 12, 2, seed);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double c : {1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0}) {
      TrainConfig cfg;
      cfg.l1_penalty = c;
      cfg.max_iters = 3000;
      cfg.tol = 1e-12;
      const std::size_t nnz = train(ds, cfg).nonzero_weights();
      EXPECT_LE(nnz, previous) << "seed " << seed << " c " << c;
      previous = nnz;
    }
  }
}

TEST(Train, ReachesOptimalityConditions) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const EmbeddingDataset ds = testing::random_dataset(200, 12, 2 + seed % 2, seed);
    const SmoothObjective f(ds.features, ds.labels, ds.num_classes,
                            LossSpec::cross_entropy());
    for (double c : {1e-3, 3e-3, 3e-2}) {
      TrainConfig cfg;
      cfg.l1_penalty = c;
      cfg.max_iters = 20000;
      cfg.tol = 1e-15;
      const LinearModel m = train(ds, cfg);
      LinearModel g = LinearModel::zeros(m.dim(), m.num_classes());
      f.value_and_gradient(m, g);
      double worst = g.bias.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
        const double w = m.weights.data()[i];
        const double gi = g.weights.data()[i];
        worst = std::max(worst, w == 0.0 ? std::abs(gi) - c
                                         : std::abs(gi + (w > 0 ? c : -c)));
      }
      EXPECT_LE(worst, 1e-6) << "seed " << seed << " c " << c;
    }
  }
}

TEST(Train, WeightScalingLeavesTrajectoryUnchanged) {
  const EmbeddingDataset ds = testing::random_dataset(60, 4, 2, 3);
  const auto w = random_weights(60, 3);
  std::vector<double> w10(w);
  for (auto& v : w10) v *= 10.0;
  TrainConfig a;
  a.l1_penalty = 1e-3;
  a.example_weights = w;
  TrainConfig b = a;
  b.example_weights = w10;
  TrainTrace ta, tb;
  const LinearModel ma = train(ds, a, &ta);
  const LinearModel mb = train(ds, b, &tb);
  ASSERT_EQ(ta.objective.size(), tb.objective.size());
  for (std::size_t i = 0; i < ta.objective.size(); ++i) {
    EXPECT_NEAR(ta.objective[i], tb.objective[i], 1e-12);
  }
  EXPECT_LT((ma.weights - mb.weights).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Train, InverseConventionMapsToDirectPenalty) {
  const EmbeddingDataset ds = testing::random_dataset(50, 4, 2, 6);
  TrainConfig inv;
  inv.penalty_convention = PenaltyConvention::kInverse;
  inv.l1_penalty = 0.5;  // C
  TrainConfig direct;
  direct.l1_penalty = 1.0 / (0.5 * 50);
  EXPECT_EQ(train(ds, inv), train(ds, direct));
  inv.l1_penalty = 0.0;  // no penalty
  EXPECT_EQ(train(ds, inv), train(ds, TrainConfig{}));
}

TEST(Train, InverseConventionUsesRescaledWeightSum) {
  const EmbeddingDataset ds = testing::random_dataset(40, 3, 2, 2);
  std::vector<double> w(40, 2.0);
  for (std::size_t i = 0; i < 10; ++i) w[i] = 10.0;  // lambda = 5
  TrainConfig inv;
  inv.penalty_convention = PenaltyConvention::kInverse;
  inv.l1_penalty = 2.0;
  inv.example_weights = w;
  TrainConfig direct = inv;
  direct.penalty_convention = PenaltyConvention::kDirect;
  direct.l1_penalty = 1.0 / (2.0 * (30 + 10 * 5));
  EXPECT_EQ(train(ds, inv), train(ds, direct));
}

TEST(Train, WarmStartFromOptimumStaysPut) {
  const EmbeddingDataset ds = testing::random_dataset(60, 3, 2, 9);
  TrainConfig cfg;
  cfg.l1_penalty = 0.01;
  cfg.max_iters = 5000;
  cfg.tol = 1e-14;
  const LinearModel m = train(ds, cfg);
  cfg.warm_start = m;
  TrainTrace trace;
  const LinearModel again = train(ds, cfg, &trace);
  EXPECT_LT((again.weights - m.weights).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Train, ErrorsAreTyped) {
  const EmbeddingDataset ds = testing::random_dataset(10, 2, 2, 1);
  auto kind = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  TrainConfig cfg;
  cfg.l1_penalty = -1;
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg = {};
  cfg.tol = 0;
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg = {};
  cfg.example_weights = std::vector<double>(10, 0.0);
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg.example_weights = std::vector<double>(9, 1.0);
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg = {};
  cfg.loss = LossSpec::alpha_loss(0.0);
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kParameter);
  cfg = {};
  cfg.warm_start = LinearModel::zeros(3, 2);
  EXPECT_EQ(kind([&] { train(ds, cfg); }), ErrorKind::kShape);
  EXPECT_EQ(kind([&] { train(ds.features, LabelVector(10, 1), 2, {}); }),
            ErrorKind::kDegenerateData);
  EXPECT_EQ(kind([&] { train(ds.features, LabelVector(10, 3), 2, {}); }),
            ErrorKind::kValidation);
}

TEST(Train, HugeFixedStepDiverges) {
  EmbeddingDataset ds = testing::random_dataset(20, 3, 2, 1);
  ds.features *= 1e30f;
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.max_steps_override = 5;
  try {
    train(ds, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
  }
}

TEST(Finetune, ZeroStepsOrZeroRateKeepParameters) {
  const EmbeddingDataset ds = testing::random_dataset(20, 3, 2, 1);
  const LinearModel m = random_model(3, 2, 5);
  EXPECT_EQ(finetune(m, ds.features, ds.labels, 0, 0.1), m);
  EXPECT_EQ(finetune(m, ds.features, ds.labels, 25, 0.0), m);
  EXPECT_THROW(finetune(m, ds.features, ds.labels, -1, 0.1), Error);
}

TEST(Finetune, DescendsOnSeparablePair) {
  FeatureMatrix x(2, 1);
  x << -1, 1;
  const LabelVector y = {0, 1};
  const LinearModel start = LinearModel::zeros(1, 2);
  const LinearModel after = finetune(start, x, y, 100, 0.1);
  const SmoothObjective f(x, y, 2, LossSpec::cross_entropy());
  EXPECT_LT(f.value(after), f.value(start));
}

TEST(Finetune, EqualsPlainGradientDescent) {
  const EmbeddingDataset ds = testing::random_dataset(25, 3, 3, 2);
  const LinearModel start = random_model(3, 3, 1, 0.1);
  const SmoothObjective f(ds.features, ds.labels, 3, LossSpec::cross_entropy());
  LinearModel manual = start;
  LinearModel grad = LinearModel::zeros(3, 3);
  for (int s = 0; s < 7; ++s) {
    f.value_and_gradient(manual, grad);
    manual.weights -= 0.05 * grad.weights;
    manual.bias -= 0.05 * grad.bias;
  }
  const LinearModel tuned = finetune(start, ds.features, ds.labels, 7, 0.05);
  EXPECT_LT((tuned.weights - manual.weights).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((tuned.bias - manual.bias).cwiseAbs().maxCoeff(), 1e-14);
}

}  // namespace
}  // namespace wgaknn
