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

// Full-batch training of the last layer.
//
// Objective, with per-example weights w (uniform when absent):
//
//   F(W, b) = sum_i w_i * loss_i(W, b) / sum_i w_i  +  c * ||W||_1
//
// minimized by proximal gradient descent: a gradient step on the smooth
// part, soft-thresholding of W (the bias is never penalized), and a
// backtracking line search on the standard quadratic upper bound. An
// accepted step never increases F.
//
// Fine-tuning mode (a fixed learning rate) replaces the line search with a
// fixed number of plain steps.

#ifndef WGAKNN_TRAINER_H_
#define WGAKNN_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wgaknn/dataset.h"
#include "wgaknn/linear_model.h"

namespace wgaknn {

// How `l1_penalty` is read.
//   kDirect   c multiplies ||W||_1 in the normalized objective above.
//   kInverse  the value is an inverse regularization strength C in the
//             library convention  C * sum_i w_i loss_i + ||W||_1, mapped to
//             c = 1 / (C * sum_i w_i) with the weights rescaled so the
//             smallest positive one is 1. C = 0 disables the penalty.
enum class PenaltyConvention { kDirect, kInverse };

struct StepPolicy {
  double initial_step = 1.0;
  double shrink = 0.5;
  double grow = 2.0;
  double min_step = 1e-14;
};

struct TrainConfig {
  LossSpec loss;
  double l1_penalty = 0.0;
  PenaltyConvention penalty_convention = PenaltyConvention::kDirect;
  std::optional<std::vector<double>> example_weights;
  int max_iters = 1000;
  double tol = 1e-9;  // on |F_prev - F| / max(1, |F_prev|)
  StepPolicy step;
  std::optional<LinearModel> warm_start;

  // Fine-tuning mode: when learning_rate is set, run exactly
  // max_steps_override (or max_iters) fixed steps; tol is ignored.
  std::optional<int> max_steps_override;
  std::optional<double> learning_rate;

  void validate(std::size_t num_rows) const;
};

struct TrainTrace {
  std::vector<double> objective;  // F after every accepted step, F(init) first
  int iterations = 0;
  bool converged = false;
};

LinearModel train(const FeatureMatrix& features,
                  std::span<const std::int32_t> labels, int num_classes,
                  const TrainConfig& config, TrainTrace* trace = nullptr);

LinearModel train(const EmbeddingDataset& dataset, const TrainConfig& config,
                  TrainTrace* trace = nullptr);

// `steps` fixed-step gradient descent iterations on the unweighted,
// unpenalized mean cross-entropy, starting from `model`.
LinearModel finetune(const LinearModel& model, const FeatureMatrix& features,
                     std::span<const std::int32_t> labels, int steps,
                     double learning_rate);

// Smooth part of the objective and its gradient. Exposed so the analytic
// gradient can be checked against finite differences.
class SmoothObjective {
 public:
  // Weights are divided by the smallest positive weight before use, so
  // equal weights of any magnitude evaluate bit-identically to no weights.
  SmoothObjective(const FeatureMatrix& features,
                  std::span<const std::int32_t> labels, int num_classes,
                  LossSpec loss, std::span<const double> weights = {});

  double value(const LinearModel& model) const;
  // Value, with the gradient written into `grad` (same shape as model).
  double value_and_gradient(const LinearModel& model, LinearModel& grad) const;

  std::size_t num_rows() const { return labels_.size(); }
  // Sum of the rescaled weights; n when unweighted.
  double weight_sum() const { return weight_sum_; }

 private:
  Eigen::MatrixXd features_;  // n x d, column-major for the GEMMs
  std::vector<std::int32_t> labels_;
  Eigen::VectorXd weights_;  // normalized to sum 1
  int num_classes_;
  LossSpec loss_;
  double weight_sum_ = 0.0;
};

}  // namespace wgaknn

#endif  // WGAKNN_TRAINER_H_
