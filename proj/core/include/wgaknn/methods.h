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

// Retraining strategies for the last layer.
//
//   erm       unweighted fit on the retrain set
//   guw       group upweighting, weight n / |G_g| per row
//   gds       group downsampling to the smallest group size
//   rad       fit a penalized identification model, upweight its errors
//   self      fine-tune a base model on its highest-loss, class-balanced errors
//   knn-rad   kNN label spreading, then rad on the spread labels
//   knn-self  kNN label spreading, then self on the spread labels
//
// guw and gds need domain annotations; the others only use observed labels.

#ifndef WGAKNN_METHODS_H_
#define WGAKNN_METHODS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wgaknn/dataset.h"
#include "wgaknn/groups.h"
#include "wgaknn/linear_model.h"
#include "wgaknn/noise.h"
#include "wgaknn/spread.h"
#include "wgaknn/trainer.h"

namespace wgaknn {

enum class MethodKind { kErm, kGuw, kGds, kRad, kSelf, kKnnRad, kKnnSelf };

std::string_view method_name(MethodKind method);
// Throws a parameter error for unknown names.
MethodKind parse_method(std::string_view name);
std::vector<MethodKind> all_methods();
bool needs_domains(MethodKind method);
bool uses_spreading(MethodKind method);

// Rows misclassified by an identification model, ascending.
struct ErrorSet {
  RowIndices indices;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

struct RadConfig {
  double c_id = 0.0;
  double c_retrain = 0.0;
  double upweight = 1.0;  // lambda
  LossSpec id_loss;
  // Convention, iteration budget and tolerance shared by both fits.
  TrainConfig base;

  void validate() const;
};

struct SelfConfig {
  std::size_t n_sub = 2;
  int finetune_steps = 0;
  double learning_rate = 0.0;
  std::uint64_t balance_seed = 0;

  void validate(int num_classes) const;
};

LinearModel run_erm(const EmbeddingDataset& retrain, double c,
                    const TrainConfig& base = {});

// Example weight n / |G_g(i)| for every row; each group's weights sum to n.
std::vector<double> guw_weights(const GroupTable& groups);

LinearModel run_guw(const EmbeddingDataset& retrain, const GroupTable& groups,
                    double c, const TrainConfig& base = {});

// Rows kept by downsampling every group to n_min, ascending.
RowIndices gds_subsample(const GroupTable& groups, std::uint64_t seed);

LinearModel run_gds(const EmbeddingDataset& retrain, const GroupTable& groups,
                    double c, std::uint64_t seed, const TrainConfig& base = {});

ErrorSet build_error_set(const LinearModel& id_model,
                         const EmbeddingDataset& retrain);

struct RadOutput {
  LinearModel model;
  LinearModel id_model;
  ErrorSet error_set;
};

RadOutput run_rad(const EmbeddingDataset& retrain, const RadConfig& config);

struct SelfOutput {
  LinearModel model;
  ErrorSet error_set;
  RowIndices selected;  // the n_sub highest-loss error rows, ascending
  RowIndices balanced;  // class-balanced subset of `selected`, ascending
};

SelfOutput run_self(const EmbeddingDataset& retrain,
                    const LinearModel& base_model, const SelfConfig& config);

struct KnnRadOutput {
  RadOutput rad;
  LabelVector cleaned_labels;
};

struct KnnSelfOutput {
  SelfOutput self;
  LabelVector cleaned_labels;
};

KnnRadOutput run_knn_rad(const EmbeddingDataset& retrain,
                         const SpreadConfig& spread, const RadConfig& config);

KnnSelfOutput run_knn_self(const EmbeddingDataset& retrain,
                           const LinearModel& base_model,
                           const SpreadConfig& spread,
                           const SelfConfig& config);

// Error-set rows bucketed by noise (flip mask) and group rarity. A row is
// "minority" when its group is smaller than the median non-empty group size.
struct Composition {
  std::size_t clean_minority = 0;
  std::size_t noisy_majority = 0;
  std::size_t clean_majority = 0;
  std::size_t noisy_minority = 0;

  std::size_t total() const {
    return clean_minority + noisy_majority + clean_majority + noisy_minority;
  }
  bool operator==(const Composition&) const = default;
};

Composition error_set_composition(const ErrorSet& error_set,
                                  const GroupTable& groups,
                                  std::span<const std::uint8_t> flip_mask);

// Result record emitted by each method run.
struct MethodRecord {
  std::string method;
  std::map<std::string, double> config;
  std::uint64_t seed = 0;
  std::size_t error_set_size = 0;
  std::optional<Composition> composition;
  std::optional<double> cleaned_label_accuracy;
  std::string model_path;
};

std::string to_json(const MethodRecord& record);

}  // namespace wgaknn

#endif  // WGAKNN_METHODS_H_
