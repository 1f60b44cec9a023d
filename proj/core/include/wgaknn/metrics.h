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

// Worst-group accuracy and seed aggregation.

#ifndef WGAKNN_METRICS_H_
#define WGAKNN_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wgaknn/dataset.h"
#include "wgaknn/groups.h"
#include "wgaknn/linear_model.h"

namespace wgaknn {

struct ExperimentResult {
  std::string method;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  double wga = 0.0;
  double overall_accuracy = 0.0;
  std::vector<double> group_accuracies;  // indexed by group id
};

// Scores `predicted` against the clean labels of the rows in `groups`.
// Every group of the table must be non-empty.
ExperimentResult evaluate_predictions(std::span<const std::int32_t> predicted,
                                      std::span<const std::int32_t> clean,
                                      const GroupTable& groups);

// Groups must come from the clean labels and domains of `test`.
ExperimentResult worst_group_accuracy(const LinearModel& model,
                                      const EmbeddingDataset& test,
                                      const GroupTable& groups);

// Convenience: derives the clean group table of `test` first.
ExperimentResult worst_group_accuracy(const LinearModel& model,
                                      const EmbeddingDataset& test);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct SummaryRow {
  std::string method;
  double noise_level = 0.0;
  Summary wga;
  Summary overall;
};

// One row per (method, noise level), sorted by method then noise level.
std::vector<SummaryRow> aggregate(std::span<const ExperimentResult> results);

// Rows sorted by (method, noise, seed); header
// method,noise,seed,wga,overall,acc_g0,...
void write_results_csv(std::span<const ExperimentResult> results,
                       std::ostream& out);
std::vector<ExperimentResult> read_results_csv(std::istream& in);

}  // namespace wgaknn

#endif  // WGAKNN_METRICS_H_
