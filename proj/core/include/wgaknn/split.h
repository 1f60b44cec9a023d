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
#ifndef WGAKNN_SPLIT_H_
#define WGAKNN_SPLIT_H_

#include <cstdint>

#include "wgaknn/dataset.h"

namespace wgaknn {

struct ValidationSplit {
  EmbeddingDataset retrain;  // observed (noisy) labels, used for fitting
  EmbeddingDataset holdout;  // clean labels, used only for model selection
  RowIndices retrain_rows;   // ascending indices into the input
  RowIndices holdout_rows;
};

// Stratified split of a validation set. The retrain half receives
// ceil(fraction * n) rows; every class contributes floor or ceil of its
// proportional share, so per-class proportions agree within one row.
// Stratification uses clean labels when known.
ValidationSplit split_validation(const EmbeddingDataset& dataset,
                                 double fraction, std::uint64_t seed);

}  // namespace wgaknn

#endif  // WGAKNN_SPLIT_H_
