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

#include "wgaknn/knn.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "test_util.h"
#include "wgaknn/error.h"

namespace wgaknn {
namespace {

FeatureMatrix line(std::initializer_list<float> xs) {
  FeatureMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (float v : xs) x(i++, 0) = v;
  return x;
}

std::vector<std::vector<std::uint32_t>> lists(const KnnGraph& g) {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::size_t i = 0; i < g.num_rows(); ++i) {
    auto nb = g.neighbors(i);
    out.emplace_back(nb.begin(), nb.end());
  }
  return out;
}

TEST(KnnGraph, ThreePointsOnALine) {
  const KnnGraph g = build_knn_graph(line({0, 1, 3}), 1, false);
  EXPECT_EQ(lists(g), (std::vector<std::vector<std::uint32_t>>{{1}, {0}, {1}}));
  EXPECT_DOUBLE_EQ(g.distances(2)[0], 2.0);
}

TEST(KnnGraph, CompleteGraphWithoutSelf) {
  const FeatureMatrix x = testing::random_features(9, 3, 2);
  const KnnGraph g = build_knn_graph(x, 8, false);
  for (std::size_t i = 0; i < 9; ++i) {
    std::set<std::uint32_t> s(g.neighbors(i).begin(), g.neighbors(i).end());
    EXPECT_EQ(s.size(), 8u);
    EXPECT_EQ(s.count(static_cast<std::uint32_t>(i)), 0u);
  }
}

TEST(KnnGraph, InDegreesShowAsymmetry) {
  const KnnGraph g = build_knn_graph(line({0, 1, 2.1f}), 1, false);
  const auto deg = g.in_degrees();
  EXPECT_EQ(deg[1], 2u);
  EXPECT_EQ(deg[2], 0u);
}

TEST(KnnGraph, SelfComesFirstWhenIncluded) {
  // Duplicate rows sit at distance 0 from each other.
  FeatureMatrix x = line({1, 1, 1, 5});
  const KnnGraph g = build_knn_graph(x, 3, true);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(g.neighbors(i)[0], i);
    EXPECT_EQ(g.distances(i)[0], 0.0);
  }
  EXPECT_EQ(lists(g)[1], (std::vector<std::uint32_t>{1, 0, 2}));
}

TEST(KnnGraph, DistanceTiesGoToSmallerIndex) {
  const KnnGraph g = build_knn_graph(line({0, -1, 1, 2}), 2, false);
  EXPECT_EQ(lists(g)[0], (std::vector<std::uint32_t>{1, 2}));
}

TEST(KnnGraph, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 20 + 13 * seed;
    const std::size_t d = 1 + seed % 8;
    const FeatureMatrix x = seed % 2 ? testing::lattice_features(n, d, seed)
                                     : testing::random_features(n, d, seed);
    for (bool self : {true, false}) {
      const std::size_t k = 1 + seed % 12;
      const KnnGraph g = build_knn_graph(x, k, self);
      EXPECT_EQ(lists(g), testing::brute_force_knn(x, k, self))
          << "seed " << seed << " self " << self;
    }
  }
}

TEST(KnnGraph, RowsHaveDistinctIndicesAndSortedDistances) {
  const FeatureMatrix x = testing::lattice_features(60, 2, 4);
  const KnnGraph g = build_knn_graph(x, 10, true);
  for (std::size_t i = 0; i < 60; ++i) {
    std::set<std::uint32_t> s(g.neighbors(i).begin(), g.neighbors(i).end());
    EXPECT_EQ(s.size(), 10u);
    for (std::size_t r = 1; r < 10; ++r) {
      EXPECT_LE(g.distances(i)[r - 1], g.distances(i)[r]);
    }
  }
}

TEST(KnnGraph, TruncationEqualsSmallerBuild) {
  const FeatureMatrix x = testing::lattice_features(80, 3, 9);
  const KnnGraph big = build_knn_graph(x, 15, true);
  for (std::size_t k : {1u, 4u, 15u}) {
    const KnnGraph small = build_knn_graph(x, k, true);
    EXPECT_EQ(lists(big.truncated(k)), lists(small));
  }
}

TEST(KnnGraph, KOutOfRangeIsParameterError) {
  const FeatureMatrix x = testing::random_features(5, 2, 1);
  for (auto [k, self] : {std::pair{std::size_t{0}, true}, {6, true}, {5, false}}) {
    try {
      build_knn_graph(x, k, self);
      ADD_FAILURE() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParameter);
    }
  }
  EXPECT_NO_THROW(build_knn_graph(x, 5, true));
  EXPECT_NO_THROW(build_knn_graph(x, 4, false));
}

TEST(KnnGraph, CsvDumpListsEveryEdge) {
  const KnnGraph g = build_knn_graph(line({0, 1, 3}), 2, true);
  const auto path = std::filesystem::path(::testing::TempDir()) / "g.csv";
  write_graph_csv(g, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "src,rank,dst,distance");
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 6);
}

}  // namespace
}  // namespace wgaknn
