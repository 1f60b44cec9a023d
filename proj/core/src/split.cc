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
#include "wgaknn/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wgaknn/error.h"

namespace wgaknn {

ValidationSplit split_validation(const EmbeddingDataset& dataset,
                                 double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorKind::kParameter,
         "split fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  const std::size_t n = dataset.size();
  if (n < 2) fail(ErrorKind::kParameter, "cannot split fewer than two rows");

  const LabelVector& strata = dataset.reference_labels();
  std::vector<RowIndices> by_class(static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(strata[i])].push_back(i);
  }

  const auto target = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  // Floor of each class's share, then hand out the remainder by largest
  // fractional part (class id breaks ties).
  std::vector<std::size_t> take(by_class.size());
  std::vector<double> frac_part(by_class.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double share = fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(share));
    frac_part[c] = share - std::floor(share);
    assigned += take[c];
  }
  std::vector<std::size_t> order(by_class.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac_part[a] > frac_part[b];
  });
  for (std::size_t r = 0; assigned < target && r < order.size(); ++r) {
    const auto c = order[r];
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }

  std::mt19937_64 rng(seed);
  ValidationSplit out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    out.retrain_rows.insert(out.retrain_rows.end(), rows.begin(),
                            rows.begin() + static_cast<std::ptrdiff_t>(take[c]));
    out.holdout_rows.insert(out.holdout_rows.end(),
                            rows.begin() + static_cast<std::ptrdiff_t>(take[c]),
                            rows.end());
  }
  std::sort(out.retrain_rows.begin(), out.retrain_rows.end());
  std::sort(out.holdout_rows.begin(), out.holdout_rows.end());

  out.retrain = dataset.subset(out.retrain_rows);
  out.retrain.split_tag = SplitTag::kRetrain;
  out.holdout = dataset.subset(out.holdout_rows);
  out.holdout.split_tag = SplitTag::kHoldout;
  if (out.holdout.clean_labels) out.holdout.labels = *out.holdout.clean_labels;
  return out;
}

}  // namespace wgaknn
