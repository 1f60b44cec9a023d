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
#include "wgaknn/knn.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "wgaknn/error.h"

namespace wgaknn {

KnnGraph::KnnGraph(std::size_t num_rows, std::size_t k, bool include_self,
                   std::vector<std::uint32_t> neighbors,
                   std::vector<double> distances)
    : num_rows_(num_rows),
      k_(k),
      include_self_(include_self),
      neighbors_(std::move(neighbors)),
      distances_(std::move(distances)) {
  if (neighbors_.size() != num_rows_ * k_ ||
      distances_.size() != num_rows_ * k_) {
    fail(ErrorKind::kShape, "neighbor table does not match n * k");
  }
}

KnnGraph KnnGraph::truncated(std::size_t k) const {
  if (k == 0 || k > k_) {
    fail(ErrorKind::kParameter, "cannot truncate a k=" + std::to_string(k_) +
                                    " graph to k=" + std::to_string(k));
  }
  std::vector<std::uint32_t> nb(num_rows_ * k);
  std::vector<double> dist(num_rows_ * k);
  for (std::size_t i = 0; i < num_rows_; ++i) {
    std::copy_n(neighbors_.begin() + static_cast<std::ptrdiff_t>(i * k_), k,
                nb.begin() + static_cast<std::ptrdiff_t>(i * k));
    std::copy_n(distances_.begin() + static_cast<std::ptrdiff_t>(i * k_), k,
                dist.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return KnnGraph(num_rows_, k, include_self_, std::move(nb), std::move(dist));
}

std::vector<std::size_t> KnnGraph::in_degrees() const {
  std::vector<std::size_t> deg(num_rows_, 0);
  for (auto j : neighbors_) ++deg[j];
  return deg;
}

KnnGraph build_knn_graph(const FeatureMatrix& features, std::size_t k,
                         bool include_self) {
  const auto n = static_cast<std::size_t>(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  const std::size_t limit = include_self ? n : (n == 0 ? 0 : n - 1);
  if (k < 1 || k > limit) {
    fail(ErrorKind::kParameter,
         "k=" + std::to_string(k) + " out of range for n=" + std::to_string(n) +
             (include_self ? " (self included)" : " (self excluded)"));
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::kParameter, "too many rows for a 32-bit neighbor index");
  }
  if (!features.allFinite()) {
    fail(ErrorKind::kValidation, "features contain non-finite values");
  }

  std::vector<std::uint32_t> neighbors(n * k);
  std::vector<double> distances(n * k);
  const float* data = features.data();
  const auto signed_n = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel
  {
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t si = 0; si < signed_n; ++si) {
      const auto i = static_cast<std::size_t>(si);
      const float* xi = data + i * d;
      cand.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const float* xj = data + j * d;
        double sq = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
          const double diff =
              static_cast<double>(xi[t]) - static_cast<double>(xj[t]);
          sq += diff * diff;
        }
        cand.emplace_back(sq, static_cast<std::uint32_t>(j));
      }
      const std::size_t others = include_self ? k - 1 : k;
      // Pair ordering is (distance, index): exactly the tie rule we want.
      if (others > 0) {
        std::partial_sort(cand.begin(),
                          cand.begin() + static_cast<std::ptrdiff_t>(others),
                          cand.end());
      }
      std::size_t slot = i * k;
      if (include_self) {
        neighbors[slot] = static_cast<std::uint32_t>(i);
        distances[slot] = 0.0;
        ++slot;
      }
      for (std::size_t r = 0; r < others; ++r, ++slot) {
        neighbors[slot] = cand[r].second;
        distances[slot] = std::sqrt(cand[r].first);
      }
    }
  }
  return KnnGraph(n, k, include_self, std::move(neighbors),
                  std::move(distances));
}

void write_graph_csv(const KnnGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "src,rank,dst,distance\n";
  char buf[40];
  for (std::size_t i = 0; i < graph.num_rows(); ++i) {
    const auto nb = graph.neighbors(i);
    const auto dist = graph.distances(i);
    for (std::size_t r = 0; r < graph.k(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", dist[r]);
      out << i << ',' << r << ',' << nb[r] << ',' << buf << '\n';
    }
  }
}

}  // namespace wgaknn
