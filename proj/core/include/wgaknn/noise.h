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
#ifndef WGAKNN_NOISE_H_
#define WGAKNN_NOISE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "wgaknn/dataset.h"

namespace wgaknn {

// Symmetric label noise: every label is independently replaced with
// probability p by a class drawn uniformly from the other classes.
struct NoiseSpec {
  double p = 0.0;  // in [0, 0.5)
  std::uint64_t seed = 0;
};

using FlipMask = std::vector<std::uint8_t>;

struct NoisyLabels {
  LabelVector labels;
  FlipMask flip_mask;  // 1 where the label was changed

  std::size_t num_flipped() const;
};

NoisyLabels inject_symmetric_noise(std::span<const std::int32_t> labels,
                                   int num_classes, const NoiseSpec& spec);

// Applies noise to the observed labels of `dataset`. If the dataset has no
// clean labels yet, the pre-noise labels become its clean labels. Features
// and domains are untouched.
EmbeddingDataset with_symmetric_noise(const EmbeddingDataset& dataset,
                                      const NoiseSpec& spec,
                                      FlipMask* mask_out = nullptr);

}  // namespace wgaknn

#endif  // WGAKNN_NOISE_H_
