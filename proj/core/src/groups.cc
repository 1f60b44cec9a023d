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
#include "wgaknn/groups.h"

#include <algorithm>
#include <limits>
#include <string>

#include "wgaknn/error.h"

namespace wgaknn {

std::vector<int> GroupTable::listed_groups() const {
  std::vector<int> out;
  for (int g = 0; g < num_groups(); ++g) {
    if (sizes[static_cast<std::size_t>(g)] > 0) out.push_back(g);
  }
  return out;
}

std::vector<RowIndices> GroupTable::members() const {
  std::vector<RowIndices> out(sizes.size());
  for (std::size_t g = 0; g < sizes.size(); ++g) out[g].reserve(sizes[g]);
  for (std::size_t i = 0; i < group_of_row.size(); ++i) {
    out[static_cast<std::size_t>(group_of_row[i])].push_back(i);
  }
  return out;
}

GroupTable derive_groups(const EmbeddingDataset& dataset, GroupLabels source,
                         int num_domains) {
  if (!dataset.domains) {
    fail(ErrorKind::kMissingAnnotation, "dataset has no domain labels");
  }
  if (source == GroupLabels::kClean && !dataset.clean_labels) {
    fail(ErrorKind::kMissingAnnotation, "dataset has no clean labels");
  }
  const LabelVector& labels =
      source == GroupLabels::kClean ? *dataset.clean_labels : dataset.labels;
  const LabelVector& domains = *dataset.domains;
  const int inferred = dataset.num_domains();
  if (num_domains == 0) num_domains = inferred;
  if (num_domains < inferred) {
    fail(ErrorKind::kParameter, "domain id exceeds num_domains");
  }

  GroupTable table;
  table.num_classes = dataset.num_classes;
  table.num_domains = num_domains;
  table.sizes.assign(
      static_cast<std::size_t>(dataset.num_classes) * num_domains, 0);
  table.group_of_row.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int g = table.group_id(labels[i], domains[i]);
    table.group_of_row[i] = g;
    ++table.sizes[static_cast<std::size_t>(g)];
  }
  table.n_min = std::numeric_limits<std::size_t>::max();
  for (auto s : table.sizes) {
    if (s > 0) table.n_min = std::min(table.n_min, s);
  }
  if (table.n_min == std::numeric_limits<std::size_t>::max()) table.n_min = 0;
  return table;
}

}  // namespace wgaknn
