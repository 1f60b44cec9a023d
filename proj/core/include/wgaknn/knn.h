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
#ifndef WGAKNN_KNN_H_
#define WGAKNN_KNN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wgaknn/dataset.h"

namespace wgaknn {

// Directed k-nearest-neighbor graph under the l2 distance. Row i lists its
// k neighbors by ascending distance, ties broken by the smaller row index.
// With include_self, row i always lists itself first.
//
// Viewed as a 0/1 matrix V (V(i, j) = 1 iff j is listed in row i) every row
// sums to k; V is not symmetric in general.
class KnnGraph {
 public:
  KnnGraph() = default;
  KnnGraph(std::size_t num_rows, std::size_t k, bool include_self,
           std::vector<std::uint32_t> neighbors, std::vector<double> distances);

  std::size_t num_rows() const { return num_rows_; }
  std::size_t k() const { return k_; }
  bool include_self() const { return include_self_; }

  std::span<const std::uint32_t> neighbors(std::size_t row) const {
    return {neighbors_.data() + row * k_, k_};
  }
  std::span<const double> distances(std::size_t row) const {
    return {distances_.data() + row * k_, k_};
  }

  // The graph for a smaller k. Prefixes of the sorted lists are exactly the
  // smaller-k lists, so no distances are recomputed.
  KnnGraph truncated(std::size_t k) const;

  // Number of rows listing `row` as a neighbor.
  std::vector<std::size_t> in_degrees() const;

 private:
  std::size_t num_rows_ = 0;
  std::size_t k_ = 0;
  bool include_self_ = true;
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> distances_;
};

// Exact brute-force search, O(n^2 d), parallel over query rows when OpenMP
// is available. Requires k <= n with include_self, k <= n - 1 otherwise.
KnnGraph build_knn_graph(const FeatureMatrix& features, std::size_t k,
                         bool include_self);

// Debug dump with columns src,rank,dst,distance.
void write_graph_csv(const KnnGraph& graph, const std::filesystem::path& path);

}  // namespace wgaknn

#endif  // WGAKNN_KNN_H_
