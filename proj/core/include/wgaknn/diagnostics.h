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

// Label-spreading accuracy sweeps and 2-D projections for inspection.

#ifndef WGAKNN_DIAGNOSTICS_H_
#define WGAKNN_DIAGNOSTICS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "wgaknn/dataset.h"
#include "wgaknn/spread.h"

namespace wgaknn {

struct SpreadDiagConfig {
  double p = 0.2;
  std::vector<std::size_t> k_grid = {1, 5, 11, 21, 41};
  std::vector<int> rounds_grid = {0, 1, 2};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool include_self = true;
  TiePolicy tie_policy = TiePolicy::kAssignOne;
};

struct SpreadDiagRow {
  std::size_t k = 0;
  int rounds = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std over seeds
  double ci_low = 0.0;
  double ci_high = 0.0;  // mean -/+ 1.96 std / sqrt(seeds)
  std::size_t seeds = 0;
};

// For each (k, rounds, seed): inject noise into the reference labels with
// that seed, spread, and score against the reference labels. Rows come out
// ordered by k, then rounds.
std::vector<SpreadDiagRow> spread_diagnostic(const EmbeddingDataset& dataset,
                                             const SpreadDiagConfig& config);

void write_spread_diag_csv(const std::vector<SpreadDiagRow>& rows,
                           std::ostream& out);

// Principal component projection onto the top `components` directions.
struct Projection {
  Eigen::MatrixXd coords;     // n x components
  Eigen::VectorXd variances;  // explained variance per component
};

Projection project_pca(const FeatureMatrix& features, int components = 2);

// pc1,pc2,label[,domain][,clean_label]
void write_projection_csv(const Projection& projection,
                          const EmbeddingDataset& dataset, std::ostream& out);

}  // namespace wgaknn

#endif  // WGAKNN_DIAGNOSTICS_H_
