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

#include "wgaknn/methods.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "json.hpp"

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

constexpr std::array<std::pair<MethodKind, std::string_view>, 7> kMethodNames{{
    {MethodKind::kErm, "erm"},
    {MethodKind::kGuw, "guw"},
    {MethodKind::kGds, "gds"},
    {MethodKind::kRad, "rad"},
    {MethodKind::kSelf, "self"},
    {MethodKind::kKnnRad, "knn-rad"},
    {MethodKind::kKnnSelf, "knn-self"},
}};

void require_full_groups(const GroupTable& groups, std::size_t num_rows) {
  if (groups.num_rows() != num_rows) {
    fail(ErrorKind::kShape, "group table covers " +
                                std::to_string(groups.num_rows()) +
                                " rows, dataset has " +
                                std::to_string(num_rows));
  }
  for (int g = 0; g < groups.num_groups(); ++g) {
    if (groups.sizes[static_cast<std::size_t>(g)] == 0) {
      const auto [cls, dom] = groups.class_and_domain(g);
      fail(ErrorKind::kDegenerateData,
           "group " + std::to_string(g) + " (class " + std::to_string(cls) +
               ", domain " + std::to_string(dom) + ") is empty");
    }
  }
}

TrainConfig fit_config(const TrainConfig& base, double c, LossSpec loss) {
  TrainConfig config = base;
  config.l1_penalty = c;
  config.loss = loss;
  config.example_weights.reset();
  config.warm_start.reset();
  config.learning_rate.reset();
  config.max_steps_override.reset();
  return config;
}

std::string class_counts_text(const std::vector<std::size_t>& counts) {
  std::string out = "{";
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out += (c ? ", " : "") + std::to_string(c) + ": " + std::to_string(counts[c]);
  }
  return out + "}";
}

}  // namespace

std::string_view method_name(MethodKind method) {
  for (const auto& [kind, name] : kMethodNames) {
    if (kind == method) return name;
  }
  return "unknown";
}

MethodKind parse_method(std::string_view name) {
  for (const auto& [kind, known] : kMethodNames) {
    if (known == name) return kind;
  }
  fail(ErrorKind::kParameter, "unknown method '" + std::string(name) + "'");
}

std::vector<MethodKind> all_methods() {
  std::vector<MethodKind> out;
  for (const auto& entry : kMethodNames) out.push_back(entry.first);
  return out;
}

bool needs_domains(MethodKind method) {
  return method == MethodKind::kGuw || method == MethodKind::kGds;
}

bool uses_spreading(MethodKind method) {
  return method == MethodKind::kKnnRad || method == MethodKind::kKnnSelf;
}

void RadConfig::validate() const {
  if (!(upweight >= 1.0) || !std::isfinite(upweight)) {
    fail(ErrorKind::kParameter, "upweight must be >= 1");
  }
  if (!(c_id >= 0.0) || !(c_retrain >= 0.0)) {
    fail(ErrorKind::kParameter, "penalties must be >= 0");
  }
  id_loss.validate();
}

void SelfConfig::validate(int num_classes) const {
  if (n_sub < static_cast<std::size_t>(num_classes)) {
    fail(ErrorKind::kParameter, "n_sub must be >= num_classes");
  }
  if (finetune_steps < 0) fail(ErrorKind::kParameter, "finetune_steps must be >= 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::kParameter, "learning_rate must be finite and >= 0");
  }
}

LinearModel run_erm(const EmbeddingDataset& retrain, double c,
                    const TrainConfig& base) {
  return train(retrain, fit_config(base, c, LossSpec::cross_entropy()));
}

std::vector<double> guw_weights(const GroupTable& groups) {
  const double n = static_cast<double>(groups.num_rows());
  std::vector<double> weights(groups.num_rows());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto g = static_cast<std::size_t>(groups.group_of_row[i]);
    weights[i] = n / static_cast<double>(groups.sizes[g]);
  }
  return weights;
}

LinearModel run_guw(const EmbeddingDataset& retrain, const GroupTable& groups,
                    double c, const TrainConfig& base) {
  require_full_groups(groups, retrain.size());
  TrainConfig config = fit_config(base, c, LossSpec::cross_entropy());
  config.example_weights = guw_weights(groups);
  return train(retrain, config);
}

RowIndices gds_subsample(const GroupTable& groups, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RowIndices kept;
  for (auto& rows : groups.members()) {
    if (rows.empty()) continue;
    std::shuffle(rows.begin(), rows.end(), rng);
    kept.insert(kept.end(), rows.begin(),
                rows.begin() + static_cast<std::ptrdiff_t>(groups.n_min));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

LinearModel run_gds(const EmbeddingDataset& retrain, const GroupTable& groups,
                    double c, std::uint64_t seed, const TrainConfig& base) {
  require_full_groups(groups, retrain.size());
  const RowIndices kept = gds_subsample(groups, seed);
  return train(retrain.subset(kept),
               fit_config(base, c, LossSpec::cross_entropy()));
}

ErrorSet build_error_set(const LinearModel& id_model,
                         const EmbeddingDataset& retrain) {
  const LabelVector predicted = predict(id_model, retrain.features);
  ErrorSet out;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] != retrain.labels[i]) out.indices.push_back(i);
  }
  return out;
}

RadOutput run_rad(const EmbeddingDataset& retrain, const RadConfig& config) {
  config.validate();
  RadOutput out;
  out.id_model = train(retrain, fit_config(config.base, config.c_id,
                                           config.id_loss));
  out.error_set = build_error_set(out.id_model, retrain);
  TrainConfig final_config =
      fit_config(config.base, config.c_retrain, LossSpec::cross_entropy());
  std::vector<double> weights(retrain.size(), 1.0);
  for (std::size_t i : out.error_set.indices) weights[i] = config.upweight;
  final_config.example_weights = std::move(weights);
  out.model = train(retrain, final_config);
  return out;
}

SelfOutput run_self(const EmbeddingDataset& retrain,
                    const LinearModel& base_model, const SelfConfig& config) {
  config.validate(retrain.num_classes);
  if (config.n_sub > retrain.size()) {
    fail(ErrorKind::kParameter, "n_sub exceeds the retrain set size");
  }
  SelfOutput out;
  out.error_set = build_error_set(base_model, retrain);
  const std::vector<double> losses = per_example_loss(
      base_model, retrain.features, retrain.labels, LossSpec::cross_entropy());

  RowIndices ranked = out.error_set.indices;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) {
                     return losses[a] > losses[b];
                   });
  ranked.resize(std::min(ranked.size(), config.n_sub));
  std::sort(ranked.begin(), ranked.end());
  out.selected = ranked;

  std::vector<RowIndices> by_class(static_cast<std::size_t>(retrain.num_classes));
  for (std::size_t i : out.selected) {
    by_class[static_cast<std::size_t>(retrain.labels[i])].push_back(i);
  }
  std::vector<std::size_t> counts;
  std::size_t per_class = out.selected.size();
  for (const auto& rows : by_class) {
    counts.push_back(rows.size());
    per_class = std::min(per_class, rows.size());
  }
  if (per_class == 0) {
    fail(ErrorKind::kDegenerateSelection,
         "balanced selection is empty; per-class counts of the " +
             std::to_string(out.selected.size()) +
             " selected error rows: " + class_counts_text(counts));
  }
  std::mt19937_64 rng(config.balance_seed);
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    out.balanced.insert(out.balanced.end(), rows.begin(),
                        rows.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(out.balanced.begin(), out.balanced.end());

  const EmbeddingDataset subset = retrain.subset(out.balanced);
  out.model = finetune(base_model, subset.features, subset.labels,
                       config.finetune_steps, config.learning_rate);
  return out;
}

KnnRadOutput run_knn_rad(const EmbeddingDataset& retrain,
                         const SpreadConfig& spread, const RadConfig& config) {
  KnnRadOutput out;
  out.cleaned_labels = knn_spread(retrain.features, retrain.labels,
                                  retrain.num_classes, spread);
  out.rad = run_rad(retrain.with_labels(out.cleaned_labels), config);
  return out;
}

KnnSelfOutput run_knn_self(const EmbeddingDataset& retrain,
                           const LinearModel& base_model,
                           const SpreadConfig& spread,
                           const SelfConfig& config) {
  KnnSelfOutput out;
  out.cleaned_labels = knn_spread(retrain.features, retrain.labels,
                                  retrain.num_classes, spread);
  out.self = run_self(retrain.with_labels(out.cleaned_labels), base_model,
                      config);
  return out;
}

Composition error_set_composition(const ErrorSet& error_set,
                                  const GroupTable& groups,
                                  std::span<const std::uint8_t> flip_mask) {
  if (flip_mask.size() != groups.num_rows()) {
    fail(ErrorKind::kShape, "flip mask and group table differ in length");
  }
  Composition out;
  if (error_set.empty()) return out;
  std::vector<std::size_t> sizes;
  for (auto s : groups.sizes) {
    if (s > 0) sizes.push_back(s);
  }
  std::sort(sizes.begin(), sizes.end());
  const std::size_t m = sizes.size();
  const double median =
      m % 2 ? static_cast<double>(sizes[m / 2])
            : 0.5 * (static_cast<double>(sizes[m / 2 - 1]) +
                     static_cast<double>(sizes[m / 2]));
  for (std::size_t i : error_set.indices) {
    if (i >= groups.num_rows()) {
      fail(ErrorKind::kShape, "error-set row " + std::to_string(i) +
                                  " is out of range");
    }
    const auto g = static_cast<std::size_t>(groups.group_of_row[i]);
    const bool minority = static_cast<double>(groups.sizes[g]) < median;
    const bool noisy = flip_mask[i] != 0;
    if (noisy) {
      ++(minority ? out.noisy_minority : out.noisy_majority);
    } else {
      ++(minority ? out.clean_minority : out.clean_majority);
    }
  }
  return out;
}

std::string to_json(const MethodRecord& record) {
  nlohmann::ordered_json j;
  j["method"] = record.method;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : record.config) j["config"][key] = value;
  j["seed"] = record.seed;
  j["error_set_size"] = record.error_set_size;
  if (record.composition) {
    const auto& c = *record.composition;
    j["composition"] = {{"clean_minority", c.clean_minority},
                        {"noisy_majority", c.noisy_majority},
                        {"clean_majority", c.clean_majority},
                        {"noisy_minority", c.noisy_minority}};
  }
  if (record.cleaned_label_accuracy) {
    j["cleaned_label_accuracy"] = *record.cleaned_label_accuracy;
  }
  j["model_path"] = record.model_path;
  return j.dump(2);
}

}  // namespace wgaknn
