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

// Synthetic spurious-correlation embeddings and the k heuristic.
//
// Geometry, in units of the within-cluster std sigma:
//   class c mean        mu_c = (class_sep / sqrt 2) * q_c
//   domain sub-center   mu_c + (domain_shift / sqrt 2) * q_{C + dom}
// with q_* orthonormal directions drawn from a seeded random rotation, so any
// two class means are class_sep apart and any two domain sub-centers of a
// class are domain_shift apart. Points are isotropic Gaussians around their
// sub-center.
//
// Within class c the aligned domain is c mod num_domains. It receives
// round(correlation * class size) rows; the rest are spread evenly over the
// other domains. The test split is group-balanced.
//
// Hierarchical mode (subclusters_per_class > 1): every group keeps a core
// cluster at its sub-center plus subclusters_per_class - 1 satellites, each
// holding satellite_fraction of the group. A satellite sits
// subcluster_spacing away from a randomly chosen *other* class's mean, along
// a random direction orthogonal to all class and domain directions. Small
// neighborhoods resolve satellites; large neighborhoods and many rounds
// vote them into the neighboring class.

#ifndef WGAKNN_SYNTH_H_
#define WGAKNN_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "wgaknn/dataset.h"

namespace wgaknn {

struct SplitSizes {
  std::size_t train = 4000;
  std::size_t val = 2000;
  std::size_t test = 2000;
};

struct SynthConfig {
  int num_classes = 2;
  int num_domains = 2;
  std::size_t d = 32;
  SplitSizes sizes;
  double train_correlation = 0.9;
  double val_correlation = 0.9;
  double class_sep = 8.0;
  double domain_shift = 2.0;
  int subclusters_per_class = 1;
  double subcluster_spacing = 8.0;
  double satellite_fraction = 0.025;
  double within_std = 1.0;
  std::uint64_t seed = 0;

  // Throws a parameter error on an invalid configuration.
  void validate() const;
};

struct SynthSplits {
  EmbeddingDataset train;
  EmbeddingDataset val;
  EmbeddingDataset test;
};

SynthSplits generate(const SynthConfig& config);

// Rows per (class, domain) group of one split, indexed by group id
// class * num_domains + domain.
std::vector<std::size_t> group_sizes(const SynthConfig& config, std::size_t n,
                                     double correlation, bool balanced);

// JSON text echoing the config plus n and d of every split.
std::string synth_manifest_json(const SynthConfig& config,
                                const SynthSplits& splits,
                                const std::filesystem::path& train_file,
                                const std::filesystem::path& val_file,
                                const std::filesystem::path& test_file);

// Writes train.emb, val.emb, test.emb and manifest.json into `dir`.
void write_synth(const SynthConfig& config, const SynthSplits& splits,
                 const std::filesystem::path& dir);

struct KBoundParams {
  double p = 0.0;
  double bayes_risk = 0.0;  // in [0, 0.5)
  double lipschitz = 1.0;   // documentation only
  std::size_t d = 1;
  std::size_t n = 1;
  double scale_constant = 72.0;
  std::size_t k_min = 8;
};

// p / (1 - 2p).
double noise_ratio(double p);

// max(k_min, ceil(C_k * (R* + p / (1 - 2p))^2)), then +1 if even.
std::size_t recommend_k(const KBoundParams& params);

}  // namespace wgaknn

#endif  // WGAKNN_SYNTH_H_
