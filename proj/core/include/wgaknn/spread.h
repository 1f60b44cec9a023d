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
#ifndef WGAKNN_SPREAD_H_
#define WGAKNN_SPREAD_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include "wgaknn/dataset.h"
#include "wgaknn/knn.h"

namespace wgaknn {

// How a vote tied for the maximum count is resolved.
//   kAssignOne   binary: label 1 wins an exact k/2 split, i.e. the update
//                is 1(count_of_ones >= k/2). With more classes the largest
//                tied class id wins.
//   kKeepCurrent the row's previous label wins if it is among the tied
//                classes, otherwise the smallest tied class id.
enum class TiePolicy { kAssignOne, kKeepCurrent };

// Only uniform votes are implemented; kDistance is rejected.
enum class VoteWeighting { kUniform, kDistance };

struct SpreadConfig {
  std::size_t k = 1;
  int rounds = 1;
  bool include_self = true;
  TiePolicy tie_policy = TiePolicy::kAssignOne;
  VoteWeighting weighting = VoteWeighting::kUniform;

  void validate() const;
};

// Synchronous majority-vote label spreading: in each round every row takes
// the plurality label of its neighbors' labels from the previous round.
// Uses the first config.k neighbors of `graph` (graph.k() may be larger).
LabelVector spread_labels(const KnnGraph& graph,
                          std::span<const std::int32_t> labels, int num_classes,
                          const SpreadConfig& config);

// Builds the graph over `features` and spreads.
LabelVector knn_spread(const FeatureMatrix& features,
                       std::span<const std::int32_t> labels, int num_classes,
                       const SpreadConfig& config);

// Fraction of positions where the two label vectors agree.
double measure_label_accuracy(std::span<const std::int32_t> predicted,
                              std::span<const std::int32_t> clean);

}  // namespace wgaknn

#endif  // WGAKNN_SPREAD_H_
