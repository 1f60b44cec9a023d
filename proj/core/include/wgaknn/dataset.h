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

// Embedding datasets and their on-disk forms.
//
// A dataset is the frozen-backbone view of a split: one row of latent
// features per example, the observed (possibly noisy) class label, and,
// when known, the clean class label and the domain label.
//
// EMB1 binary layout (little-endian throughout):
//
//   offset  size   field
//   0       4      magic "EMB1"
//   4       4      u32 version (= 1)
//   8       8      u64 n
//   16      8      u64 d
//   24      4      u32 num_classes
//   28      4      u32 flags (bit0: domains present, bit1: clean labels)
//   32      4·n·d  f32 features, row-major
//   ...     4·n    i32 labels
//   ...     4·n    i32 domains        (if bit0)
//   ...     4·n    i32 clean labels   (if bit1)
//
// The CSV mirror has a header row `f0,...,f{d-1},label[,domain][,clean_label]`.
// Inside files, -1 marks an absent annotation; a column that is entirely -1
// loads as "not present". Partially annotated columns are rejected.

#ifndef WGAKNN_DATASET_H_
#define WGAKNN_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace wgaknn {

using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelVector = std::vector<std::int32_t>;
using RowIndices = std::vector<std::size_t>;

enum class SplitTag { kTrain, kRetrain, kHoldout, kTest };

std::string_view split_tag_name(SplitTag tag);

struct EmbeddingDataset {
  FeatureMatrix features;
  LabelVector labels;  // observed, possibly noisy
  std::optional<LabelVector> clean_labels;
  std::optional<LabelVector> domains;
  int num_classes = 2;
  SplitTag split_tag = SplitTag::kTrain;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  // Throws a validation error if any invariant is broken: n, d >= 1, finite
  // features, labels in [0, num_classes), annotation lengths equal n,
  // non-negative domains.
  void validate() const;

  // Number of distinct domain ids (max + 1); 0 when domains are absent.
  int num_domains() const;

  // Clean labels when known, observed labels otherwise.
  const LabelVector& reference_labels() const;

  // Rows in the given order; annotations follow the rows.
  EmbeddingDataset subset(std::span<const std::size_t> rows) const;

  // Same rows with the observed labels replaced.
  EmbeddingDataset with_labels(LabelVector new_labels) const;

  bool operator==(const EmbeddingDataset& other) const;
};

EmbeddingDataset load_embeddings(const std::filesystem::path& path,
                                 SplitTag tag = SplitTag::kTrain);
void save_embeddings(const EmbeddingDataset& dataset,
                     const std::filesystem::path& path);

// In-memory EMB1 codec; the file functions are thin wrappers around these.
std::vector<std::uint8_t> encode_emb1(const EmbeddingDataset& dataset);
EmbeddingDataset decode_emb1(std::span<const std::uint8_t> bytes,
                             SplitTag tag = SplitTag::kTrain);

// CSV mirror. num_classes is not stored in CSV; when `num_classes` is zero
// it is inferred as max(label, clean_label) + 1.
EmbeddingDataset load_embeddings_csv(const std::filesystem::path& path,
                                     int num_classes = 0,
                                     SplitTag tag = SplitTag::kTrain);
void save_embeddings_csv(const EmbeddingDataset& dataset,
                         const std::filesystem::path& path);

// Dispatches on extension: ".csv" uses the mirror, anything else EMB1.
EmbeddingDataset load_any(const std::filesystem::path& path,
                          SplitTag tag = SplitTag::kTrain);
void save_any(const EmbeddingDataset& dataset,
              const std::filesystem::path& path);

}  // namespace wgaknn

#endif  // WGAKNN_DATASET_H_
