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

// Last-layer linear classifier over frozen embeddings:
//   f(x) = argmax_y softmax_y(x^T W + b)

#ifndef WGAKNN_LINEAR_MODEL_H_
#define WGAKNN_LINEAR_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wgaknn/dataset.h"

namespace wgaknn {

enum class LossKind { kCrossEntropy, kAlpha };

struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  double alpha = 1.0;  // only read for kAlpha

  static LossSpec cross_entropy() { return {}; }
  static LossSpec alpha_loss(double alpha) { return {LossKind::kAlpha, alpha}; }

  std::string name() const;
  void validate() const;
};

struct LinearModel {
  Eigen::MatrixXd weights;  // d x num_classes
  Eigen::VectorXd bias;     // num_classes, never penalized

  static LinearModel zeros(std::size_t dim, int num_classes);

  std::size_t dim() const { return static_cast<std::size_t>(weights.rows()); }
  int num_classes() const { return static_cast<int>(weights.cols()); }
  bool all_finite() const { return weights.allFinite() && bias.allFinite(); }
  std::size_t nonzero_weights() const;

  bool operator==(const LinearModel& other) const;
};

// Raw class scores, n x num_classes.
Eigen::MatrixXd class_scores(const LinearModel& model,
                             const FeatureMatrix& features);

// Row-wise softmax of the class scores.
Eigen::MatrixXd predict_proba(const LinearModel& model,
                              const FeatureMatrix& features);

// Argmax of the scores; ties go to the smallest class id.
LabelVector predict(const LinearModel& model, const FeatureMatrix& features);

// alpha-loss of the probability assigned to the true class:
//   alpha != 1:  alpha / (alpha - 1) * (1 - p^((alpha - 1) / alpha))
//   alpha == 1:  -log p
// Evaluated as -expm1(eps * log p) / eps with eps = (alpha - 1) / alpha, which
// is continuous through alpha = 1.
double alpha_loss(double alpha, double prob_of_true_class);

// Same loss from log p, for callers that already work in log space.
double alpha_loss_from_log(double alpha, double log_prob);

std::vector<double> per_example_loss(const LinearModel& model,
                                     const FeatureMatrix& features,
                                     std::span<const std::int32_t> labels,
                                     const LossSpec& loss);

// CSV with one column per class and d + 1 rows (bias last), plus a JSON
// sidecar at `<path>.json` recording num_classes, d and the loss.
void save_model(const LinearModel& model, const std::filesystem::path& path,
                const LossSpec& loss = LossSpec::cross_entropy());
LinearModel load_model(const std::filesystem::path& path,
                       LossSpec* loss_out = nullptr);

}  // namespace wgaknn

#endif  // WGAKNN_LINEAR_MODEL_H_
