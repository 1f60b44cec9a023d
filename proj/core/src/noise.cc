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
#include "wgaknn/noise.h"

#include <algorithm>
#include <random>
#include <string>

#include "wgaknn/error.h"

namespace wgaknn {

std::size_t NoisyLabels::num_flipped() const {
  return static_cast<std::size_t>(
      std::count(flip_mask.begin(), flip_mask.end(), std::uint8_t{1}));
}

NoisyLabels inject_symmetric_noise(std::span<const std::int32_t> labels,
                                   int num_classes, const NoiseSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p < 0.5)) {
    fail(ErrorKind::kParameter,
         "noise level must lie in [0, 0.5), got " + std::to_string(spec.p));
  }
  if (spec.p > 0.0 && num_classes < 2) {
    fail(ErrorKind::kParameter, "label noise needs at least two classes");
  }
  NoisyLabels out;
  out.labels.assign(labels.begin(), labels.end());
  out.flip_mask.assign(labels.size(), 0);
  if (spec.p == 0.0) return out;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, num_classes - 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double u = coin(rng);
    if (u >= spec.p) continue;
    if (num_classes == 2) {
      out.labels[i] = 1 - labels[i];
    } else {
      const int draw = other(rng);
      out.labels[i] = draw >= labels[i] ? draw + 1 : draw;
    }
    out.flip_mask[i] = 1;
  }
  return out;
}

EmbeddingDataset with_symmetric_noise(const EmbeddingDataset& dataset,
                                      const NoiseSpec& spec, FlipMask* mask_out) {
  auto noisy = inject_symmetric_noise(dataset.labels, dataset.num_classes, spec);
  EmbeddingDataset out = dataset;
  if (!out.clean_labels) out.clean_labels = dataset.labels;
  out.labels = std::move(noisy.labels);
  if (mask_out) *mask_out = std::move(noisy.flip_mask);
  return out;
}

}  // namespace wgaknn
