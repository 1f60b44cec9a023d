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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "test_util.h"
#include "wgaknn/error.h"
#include "wgaknn/groups.h"
#include "wgaknn/split.h"

namespace wgaknn {
namespace {

EmbeddingDataset tiny(LabelVector labels, LabelVector domains) {
  EmbeddingDataset ds;
  ds.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(labels.size()), 1);
  ds.labels = std::move(labels);
  ds.domains = std::move(domains);
  ds.num_classes = 2;
  return ds;
}

TEST(DeriveGroups, OneRowPerGroup) {
  const GroupTable t = derive_groups(tiny({0, 0, 1, 1}, {0, 1, 0, 1}));
  EXPECT_EQ(t.group_of_row, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(t.n_min, 1u);
  EXPECT_EQ(t.num_groups(), 4);
}

TEST(DeriveGroups, SingleGroup) {
  const GroupTable t = derive_groups(tiny({1, 1, 1}, {0, 0, 0}));
  EXPECT_EQ(t.listed_groups(), (std::vector<int>{1}));
  EXPECT_EQ(t.n_min, 3u);
}

TEST(DeriveGroups, HandCountedSizes) {
  const GroupTable t = derive_groups(tiny({0, 0, 0, 1}, {0, 0, 1, 1}));
  // Group id = class * num_domains + domain.
  EXPECT_EQ(t.sizes, (std::vector<std::size_t>{2, 1, 0, 1}));
  EXPECT_EQ(t.listed_groups(), (std::vector<int>{0, 1, 3}));
  EXPECT_EQ(t.n_min, 1u);
  EXPECT_EQ(t.class_and_domain(3), std::make_pair(1, 1));
}

TEST(DeriveGroups, SizesSumToRowsAndMembersPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EmbeddingDataset ds = testing::random_dataset(50 + seed, 2, 3, seed, 3);
    const GroupTable t = derive_groups(ds);
    EXPECT_EQ(std::accumulate(t.sizes.begin(), t.sizes.end(), std::size_t{0}),
              ds.size());
    std::vector<int> seen(ds.size(), 0);
    const auto members = t.members();
    for (std::size_t g = 0; g < members.size(); ++g) {
      EXPECT_EQ(members[g].size(), t.sizes[g]);
      for (auto i : members[g]) {
        ++seen[i];
        EXPECT_EQ(t.group_of_row[i], static_cast<int>(g));
      }
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST(DeriveGroups, CleanSourceUsesCleanLabels) {
  EmbeddingDataset ds = tiny({0, 1}, {0, 0});
  ds.clean_labels = LabelVector{1, 1};
  EXPECT_EQ(derive_groups(ds, GroupLabels::kClean).sizes,
            (std::vector<std::size_t>{0, 2}));
}

TEST(DeriveGroups, MissingDomainsIsAnnotationError) {
  EmbeddingDataset ds = tiny({0, 1}, {0, 0});
  ds.domains.reset();
  try {
    derive_groups(ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingAnnotation);
  }
}

TEST(SplitValidation, HalfSplitOfHundred) {
  const EmbeddingDataset ds = testing::random_dataset(100, 2, 2, 1);
  const ValidationSplit s = split_validation(ds, 0.5, 3);
  EXPECT_EQ(s.retrain.size(), 50u);
  EXPECT_EQ(s.holdout.size(), 50u);
}

TEST(SplitValidation, PartitionsForManyShapes) {
  for (std::size_t n : {2u, 3u, 7u, 50u, 101u}) {
    for (double f : {0.1, 0.5, 0.77}) {
      for (std::uint64_t seed : {0u, 1u, 99u}) {
        const EmbeddingDataset ds = testing::random_dataset(n, 2, 2, seed + n);
        const ValidationSplit s = split_validation(ds, f, seed);
        std::set<std::size_t> all(s.retrain_rows.begin(), s.retrain_rows.end());
        for (auto i : s.holdout_rows) EXPECT_TRUE(all.insert(i).second);
        EXPECT_EQ(all.size(), n);
        EXPECT_EQ(*all.rbegin(), n - 1);
        EXPECT_TRUE(std::is_sorted(s.retrain_rows.begin(), s.retrain_rows.end()));
      }
    }
  }
}

TEST(SplitValidation, StratifiesByClass) {
  EmbeddingDataset ds = testing::random_dataset(100, 2, 2, 5);
  for (std::size_t i = 0; i < 100; ++i) ds.labels[i] = i < 80 ? 0 : 1;
  ds.clean_labels = ds.labels;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ValidationSplit s = split_validation(ds, 0.5, seed);
    for (const auto* half : {&s.retrain, &s.holdout}) {
      const auto zeros = std::count(half->labels.begin(), half->labels.end(), 0);
      EXPECT_GE(zeros, 39);
      EXPECT_LE(zeros, 41);
    }
  }
}

TEST(SplitValidation, HoldoutCarriesCleanLabels) {
  EmbeddingDataset ds = testing::random_dataset(60, 2, 2, 8);
  ds.labels[0] = 1 - ds.labels[0];
  ds.labels[1] = 1 - ds.labels[1];
  const ValidationSplit s = split_validation(ds, 0.5, 2);
  EXPECT_EQ(s.holdout.labels, *s.holdout.clean_labels);
  EXPECT_EQ(s.retrain.split_tag, SplitTag::kRetrain);
  EXPECT_EQ(s.holdout.split_tag, SplitTag::kHoldout);
  for (std::size_t r = 0; r < s.retrain_rows.size(); ++r) {
    EXPECT_EQ(s.retrain.labels[r], ds.labels[s.retrain_rows[r]]);
  }
}

TEST(SplitValidation, DeterministicPerSeed) {
  const EmbeddingDataset ds = testing::random_dataset(80, 2, 2, 1);
  EXPECT_EQ(split_validation(ds, 0.5, 4).retrain_rows,
            split_validation(ds, 0.5, 4).retrain_rows);
  EXPECT_NE(split_validation(ds, 0.5, 4).retrain_rows,
            split_validation(ds, 0.5, 5).retrain_rows);
}

TEST(SplitValidation, BadFractionIsParameterError) {
  const EmbeddingDataset ds = testing::random_dataset(10, 2, 2, 1);
  for (double f : {0.0, 1.0, -0.5, 2.0}) {
    try {
      split_validation(ds, f, 0);
      ADD_FAILURE() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParameter);
    }
  }
}

}  // namespace
}  // namespace wgaknn
