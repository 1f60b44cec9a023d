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
#ifndef WGAKNN_GROUPS_H_
#define WGAKNN_GROUPS_H_

#include <cstddef>
#include <utility>
#include <vector>

#include "wgaknn/dataset.h"

namespace wgaknn {

// Which class column defines a row's group. Oracle baselines and test-time
// evaluation use clean labels; everything fitted on noisy data sees only the
// observed ones.
enum class GroupLabels { kObserved, kClean };

// Partition of rows into (class, domain) groups with
// id = class * num_domains + domain.
struct GroupTable {
  std::vector<int> group_of_row;
  std::vector<std::size_t> sizes;  // indexed by group id, may contain zeros
  int num_classes = 0;
  int num_domains = 0;
  std::size_t n_min = 0;  // smallest non-empty group

  int num_groups() const { return static_cast<int>(sizes.size()); }
  std::size_t num_rows() const { return group_of_row.size(); }

  // Ids of non-empty groups, ascending.
  std::vector<int> listed_groups() const;

  int group_id(int label, int domain) const {
    return label * num_domains + domain;
  }
  std::pair<int, int> class_and_domain(int group) const {
    return {group / num_domains, group % num_domains};
  }

  // Rows of each group in ascending order, indexed by group id.
  std::vector<RowIndices> members() const;
};

// `num_domains` = 0 infers it from the data.
GroupTable derive_groups(const EmbeddingDataset& dataset,
                         GroupLabels source = GroupLabels::kObserved,
                         int num_domains = 0);

}  // namespace wgaknn

#endif  // WGAKNN_GROUPS_H_
