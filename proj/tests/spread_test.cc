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

#include "wgaknn/spread.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "test_util.h"
#include "wgaknn/error.h"
#include "wgaknn/knn.h"
#include "wgaknn/noise.h"
#include "wgaknn/synth.h"

namespace wgaknn {
namespace {

FeatureMatrix line(std::initializer_list<float> xs) {
  FeatureMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (float v : xs) x(i++, 0) = v;
  return x;
}

// Hand-built graph from explicit neighbor lists.
KnnGraph graph_of(std::vector<std::vector<std::uint32_t>> rows, bool self) {
  const std::size_t k = rows.front().size();
  std::vector<std::uint32_t> nb;
  for (const auto& r : rows) nb.insert(nb.end(), r.begin(), r.end());
  return KnnGraph(rows.size(), k, self, nb, std::vector<double>(nb.size(), 1.0));
}

TEST(SpreadLabels, UnanimousLabelsAreFixed) {
  const FeatureMatrix x = testing::random_features(40, 3, 1);
  const LabelVector y(40, 2);
  for (std::size_t k : {1u, 5u, 17u}) {
    for (int t : {0, 1, 4}) {
      EXPECT_EQ(knn_spread(x, y, 3, {k, t, true}), y);
    }
  }
}

TEST(SpreadLabels, EvenTieAssignsOne) {
  // Row 0 sees two 0s and two 1s.
  const KnnGraph g = graph_of({{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4},
                               {1, 2, 3, 4}, {1, 2, 3, 4}},
                              false);
  const LabelVector y = {0, 0, 0, 1, 1};
  const LabelVector out = spread_labels(g, y, 2, {4, 1, false});
  EXPECT_EQ(out[0], 1);
}

TEST(SpreadLabels, KeepCurrentLeavesTiesAlone) {
  const KnnGraph g = graph_of({{1, 2}, {0, 2}, {0, 1}}, false);
  const LabelVector y = {0, 1, 0};
  SpreadConfig cfg{2, 1, false, TiePolicy::kKeepCurrent};
  // Row 0 sees {1, 0}: tie, stays 0. Row 1 sees {0, 0}: becomes 0.
  EXPECT_EQ(spread_labels(g, y, 2, cfg), (LabelVector{0, 0, 0}));
}

TEST(SpreadLabels, ColinearOutlierIsCorrected) {
  const FeatureMatrix x = line({0, 1, 2, 3, 4});
  const LabelVector y = {0, 0, 1, 0, 0};
  EXPECT_EQ(knn_spread(x, y, 2, {4, 1, true}), LabelVector(5, 0));
}

TEST(SpreadLabels, MultiClassPluralityWithLargestTiedClass) {
  const KnnGraph g = graph_of({{0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3},
                               {0, 1, 2, 3}},
                              true);
  // A plurality for 2, then a 0/2 tie that goes to the larger id.
  EXPECT_EQ(spread_labels(g, LabelVector{0, 1, 2, 2}, 3, {4, 1, true}),
            LabelVector(4, 2));
  EXPECT_EQ(spread_labels(g, LabelVector{0, 0, 2, 2}, 3, {4, 1, true}),
            LabelVector(4, 2));
}

TEST(SpreadLabels, ZeroRoundsAndSelfOnlyAreIdentity) {
  const FeatureMatrix x = testing::random_features(50, 4, 3);
  const LabelVector y = testing::random_labels(50, 3, 3);
  EXPECT_EQ(knn_spread(x, y, 3, {9, 0, true}), y);
  for (int t : {1, 2, 5}) EXPECT_EQ(knn_spread(x, y, 3, {1, t, true}), y);
}

TEST(SpreadLabels, RoundsAreSynchronous) {
  // A path graph: each row sees its right neighbor only.
  const KnnGraph g = graph_of({{1}, {2}, {3}, {3}}, false);
  const LabelVector y = {0, 0, 0, 1};
  EXPECT_EQ(spread_labels(g, y, 2, {1, 1, false}), (LabelVector{0, 0, 1, 1}));
  EXPECT_EQ(spread_labels(g, y, 2, {1, 2, false}), (LabelVector{0, 1, 1, 1}));
}

TEST(SpreadLabels, PermutationEquivariant) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 120;
    const FeatureMatrix x = testing::random_features(n, 3, seed);
    const LabelVector y = testing::random_labels(n, 3, seed + 100);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    FeatureMatrix xp(x.rows(), x.cols());
    LabelVector yp(n);
    for (std::size_t r = 0; r < n; ++r) {
      xp.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(perm[r]));
      yp[r] = y[perm[r]];
    }
    const SpreadConfig cfg{7, 2, true};
    const LabelVector a = knn_spread(x, y, 3, cfg);
    const LabelVector b = knn_spread(xp, yp, 3, cfg);
    for (std::size_t r = 0; r < n; ++r) EXPECT_EQ(b[r], a[perm[r]]);
  }
}

TEST(SpreadLabels, WellSeparatedClustersRecoverLabels) {
  // Per-row correctness is a Binomial(21, 0.8) majority event.
  double majority = 0.0;
  for (int j = 11; j <= 21; ++j) {
    majority += std::exp(std::lgamma(22.0) - std::lgamma(j + 1.0) -
                         std::lgamma(22.0 - j) + j * std::log(0.8) +
                         (21 - j) * std::log(0.2));
  }
  ASSERT_GT(majority, 0.99);

  SynthConfig cfg;
  cfg.num_domains = 1;
  cfg.d = 8;
  cfg.class_sep = 8.0;
  cfg.sizes = {2000, 10, 10};
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const EmbeddingDataset clean = generate(cfg).train;
    const EmbeddingDataset noisy = with_symmetric_noise(clean, {0.2, seed});
    const LabelVector out = knn_spread(noisy.features, noisy.labels, 2, {21, 1, true});
    total += measure_label_accuracy(out, clean.labels);
  }
  EXPECT_GE(total / 5, 0.98);
}

TEST(SpreadLabels, InvalidConfigIsRejected) {
  const FeatureMatrix x = testing::random_features(6, 2, 1);
  const LabelVector y = testing::random_labels(6, 2, 1);
  auto kind = [&](SpreadConfig cfg, int classes = 2) {
    try {
      knn_spread(x, y, classes, cfg);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind({0, 1, true}), ErrorKind::kParameter);
  EXPECT_EQ(kind({3, -1, true}), ErrorKind::kParameter);
  EXPECT_EQ(kind({3, 1, true, TiePolicy::kAssignOne, VoteWeighting::kDistance}),
            ErrorKind::kParameter);
  const KnnGraph g = build_knn_graph(x, 3, true);
  EXPECT_THROW(spread_labels(g, y, 2, {4, 1, true}), Error);
  EXPECT_THROW(spread_labels(g, y, 2, {3, 1, false}), Error);
  EXPECT_THROW(spread_labels(g, LabelVector{0, 1}, 2, {3, 1, true}), Error);
}

TEST(MeasureLabelAccuracy, Examples) {
  EXPECT_EQ(measure_label_accuracy(LabelVector{0, 1, 1}, LabelVector{0, 1, 1}), 1.0);
  EXPECT_EQ(measure_label_accuracy(LabelVector{0, 1, 0}, LabelVector{1, 0, 1}), 0.0);
  EXPECT_EQ(measure_label_accuracy(LabelVector{0, 1, 1, 0}, LabelVector{0, 1, 0, 0}),
            0.75);
  EXPECT_THROW(measure_label_accuracy(LabelVector{0}, LabelVector{0, 1}), Error);
}

}  // namespace
}  // namespace wgaknn
