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

#include <algorithm>
#include <string>
#include <vector>

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

std::int32_t vote(std::span<const std::uint32_t> nb,
                  std::span<const std::int32_t> previous, std::int32_t current,
                  int num_classes, TiePolicy policy,
                  std::vector<std::size_t>& counts) {
  if (num_classes == 2 && policy == TiePolicy::kAssignOne) {
    std::size_t ones = 0;
    for (auto j : nb) ones += previous[j] == 1 ? 1 : 0;
    return 2 * ones >= nb.size() ? 1 : 0;
  }
  std::fill(counts.begin(), counts.end(), 0);
  for (auto j : nb) ++counts[static_cast<std::size_t>(previous[j])];
  const auto best = *std::max_element(counts.begin(), counts.end());
  if (policy == TiePolicy::kKeepCurrent) {
    if (counts[static_cast<std::size_t>(current)] == best) return current;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == best) return static_cast<std::int32_t>(c);
    }
  }
  for (std::size_t c = counts.size(); c-- > 0;) {
    if (counts[c] == best) return static_cast<std::int32_t>(c);
  }
  return current;
}

}  // namespace

void SpreadConfig::validate() const {
  if (k < 1) fail(ErrorKind::kParameter, "spread k must be >= 1");
  if (rounds < 0) fail(ErrorKind::kParameter, "spread rounds must be >= 0");
  if (weighting == VoteWeighting::kDistance) {
    fail(ErrorKind::kParameter, "distance-weighted voting is not implemented");
  }
}

LabelVector spread_labels(const KnnGraph& graph,
                          std::span<const std::int32_t> labels, int num_classes,
                          const SpreadConfig& config) {
  config.validate();
  if (graph.num_rows() != labels.size()) {
    fail(ErrorKind::kShape, "graph has " + std::to_string(graph.num_rows()) +
                                " rows but " + std::to_string(labels.size()) +
                                " labels were given");
  }
  if (config.k > graph.k()) {
    fail(ErrorKind::kParameter, "spread k exceeds the graph's k");
  }
  if (config.include_self != graph.include_self()) {
    fail(ErrorKind::kParameter, "include_self differs between graph and config");
  }
  for (auto y : labels) {
    if (y < 0 || y >= num_classes) {
      fail(ErrorKind::kValidation, "label out of range for spreading");
    }
  }

  LabelVector current(labels.begin(), labels.end());
  LabelVector next(current.size());
  const auto n = static_cast<std::ptrdiff_t>(current.size());
  for (int t = 0; t < config.rounds; ++t) {
#pragma omp parallel
    {
      std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes));
#pragma omp for schedule(static)
      for (std::ptrdiff_t si = 0; si < n; ++si) {
        const auto i = static_cast<std::size_t>(si);
        next[i] = vote(graph.neighbors(i).first(config.k), current, current[i],
                       num_classes, config.tie_policy, counts);
      }
    }
    std::swap(current, next);
  }
  return current;
}

LabelVector knn_spread(const FeatureMatrix& features,
                       std::span<const std::int32_t> labels, int num_classes,
                       const SpreadConfig& config) {
  config.validate();
  if (config.rounds == 0) return LabelVector(labels.begin(), labels.end());
  const auto graph = build_knn_graph(features, config.k, config.include_self);
  return spread_labels(graph, labels, num_classes, config);
}

double measure_label_accuracy(std::span<const std::int32_t> predicted,
                              std::span<const std::int32_t> clean) {
  if (predicted.size() != clean.size()) {
    fail(ErrorKind::kShape, "label vectors differ in length");
  }
  if (predicted.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    hits += predicted[i] == clean[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace wgaknn
