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

#include "wgaknn/trainer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

double l1_norm(const Eigen::MatrixXd& w) { return w.cwiseAbs().sum(); }

void soft_threshold(Eigen::MatrixXd& w, double threshold) {
  if (threshold <= 0.0) return;
  w = w.unaryExpr([threshold](double v) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
  });
}

void check_labels(std::span<const std::int32_t> labels, int num_classes,
                  std::size_t num_rows) {
  if (labels.size() != num_rows) {
    fail(ErrorKind::kShape, "got " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(num_rows) +
                                " rows");
  }
  for (std::int32_t y : labels) {
    if (y < 0 || y >= num_classes) {
      fail(ErrorKind::kValidation, "label " + std::to_string(y) +
                                       " outside [0, " +
                                       std::to_string(num_classes) + ")");
    }
  }
}

double penalty_strength(const TrainConfig& config, double weight_sum) {
  if (config.penalty_convention == PenaltyConvention::kDirect) {
    return config.l1_penalty;
  }
  if (config.l1_penalty == 0.0) return 0.0;
  return 1.0 / (config.l1_penalty * weight_sum);
}

// One proximal step of size t from `model` with smooth gradient `grad`.
LinearModel prox_step(const LinearModel& model, const LinearModel& grad,
                      double t, double c) {
  LinearModel next;
  next.weights = model.weights - t * grad.weights;
  soft_threshold(next.weights, t * c);
  next.bias = model.bias - t * grad.bias;
  return next;
}

}  // namespace

void TrainConfig::validate(std::size_t num_rows) const {
  loss.validate();
  if (!(l1_penalty >= 0.0 && std::isfinite(l1_penalty))) {
    fail(ErrorKind::kParameter, "l1_penalty must be finite and >= 0");
  }
  if (max_iters < 1) fail(ErrorKind::kParameter, "max_iters must be >= 1");
  if (!(tol > 0.0)) fail(ErrorKind::kParameter, "tol must be > 0");
  if (!(step.initial_step > 0.0) || !(step.shrink > 0.0 && step.shrink < 1.0) ||
      !(step.grow >= 1.0) || !(step.min_step > 0.0)) {
    fail(ErrorKind::kParameter, "invalid step policy");
  }
  if (max_steps_override && *max_steps_override < 0) {
    fail(ErrorKind::kParameter, "max_steps_override must be >= 0");
  }
  if (learning_rate && !(*learning_rate >= 0.0 && std::isfinite(*learning_rate))) {
    fail(ErrorKind::kParameter, "learning_rate must be finite and >= 0");
  }
  if (example_weights) {
    if (example_weights->size() != num_rows) {
      fail(ErrorKind::kParameter,
           "example_weights has length " +
               std::to_string(example_weights->size()) + ", expected " +
               std::to_string(num_rows));
    }
    bool any_positive = false;
    for (double w : *example_weights) {
      if (!(w >= 0.0 && std::isfinite(w))) {
        fail(ErrorKind::kParameter, "example weights must be finite and >= 0");
      }
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) {
      fail(ErrorKind::kParameter, "at least one example weight must be > 0");
    }
  }
}

SmoothObjective::SmoothObjective(const FeatureMatrix& features,
                                 std::span<const std::int32_t> labels,
                                 int num_classes, LossSpec loss,
                                 std::span<const double> weights)
    : features_(features.cast<double>()),
      labels_(labels.begin(), labels.end()),
      num_classes_(num_classes),
      loss_(loss) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  check_labels(labels, num_classes, static_cast<std::size_t>(features.rows()));
  loss_.validate();
  weights_ = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) {
    if (weights.size() != labels_.size()) {
      fail(ErrorKind::kShape, "weights do not match rows");
    }
    double smallest = 0.0;
    for (double w : weights) {
      if (w > 0.0 && (smallest == 0.0 || w < smallest)) smallest = w;
    }
    if (!(smallest > 0.0)) fail(ErrorKind::kParameter, "all example weights are 0");
    for (Eigen::Index i = 0; i < n; ++i) {
      weights_(i) = weights[static_cast<std::size_t>(i)] / smallest;
    }
  }
  weight_sum_ = weights_.sum();
  weights_ /= weight_sum_;
}

double SmoothObjective::value(const LinearModel& model) const {
  Eigen::MatrixXd scores = features_ * model.weights;
  scores.rowwise() += model.bias.transpose();
  const double alpha = loss_.kind == LossKind::kAlpha ? loss_.alpha : 1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const auto row = scores.row(i);
    const double top = row.maxCoeff();
    const double z = (row.array() - top).exp().sum();
    const double log_p = std::min(0.0, (row(labels_[i]) - top) - std::log(z));
    total += weights_(i) * alpha_loss_from_log(alpha, log_p);
  }
  return total;
}

double SmoothObjective::value_and_gradient(const LinearModel& model,
                                           LinearModel& grad) const {
  Eigen::MatrixXd scores = features_ * model.weights;
  scores.rowwise() += model.bias.transpose();
  const double alpha = loss_.kind == LossKind::kAlpha ? loss_.alpha : 1.0;
  const double eps = (alpha - 1.0) / alpha;
  double total = 0.0;
  // Turn scores into d(loss)/d(scores) in place.
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    const double top = row.maxCoeff();
    const double shifted_y = row(labels_[i]) - top;
    row.array() = (row.array() - top).exp();
    const double z = row.sum();
    const double log_p = std::min(0.0, shifted_y - std::log(z));
    total += weights_(i) * alpha_loss_from_log(alpha, log_p);
    row /= z;
    row(labels_[i]) -= 1.0;
    const double scale = eps == 0.0 ? 1.0 : std::exp(eps * log_p);
    row *= weights_(i) * scale;
  }
  grad.weights.noalias() = features_.transpose() * scores;
  grad.bias = scores.colwise().sum().transpose();
  return total;
}

LinearModel train(const FeatureMatrix& features,
                  std::span<const std::int32_t> labels, int num_classes,
                  const TrainConfig& config, TrainTrace* trace) {
  const auto n = static_cast<std::size_t>(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  if (num_classes < 1) fail(ErrorKind::kParameter, "num_classes must be >= 1");
  check_labels(labels, num_classes, n);
  config.validate(n);

  LinearModel model;
  if (config.warm_start) {
    model = *config.warm_start;
    if (model.dim() != d || model.num_classes() != num_classes) {
      fail(ErrorKind::kShape, "warm start shape does not match the data");
    }
  } else {
    std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
    int distinct = 0;
    for (std::int32_t y : labels) {
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        ++distinct;
      }
    }
    if (distinct < 2) {
      fail(ErrorKind::kDegenerateData,
           "training labels contain " + std::to_string(distinct) +
               " distinct class(es); at least 2 are required");
    }
    model = LinearModel::zeros(d, num_classes);
  }

  const std::span<const double> weights =
      config.example_weights ? std::span<const double>(*config.example_weights)
                             : std::span<const double>();
  const SmoothObjective objective(features, labels, num_classes, config.loss,
                                  weights);
  const double c = penalty_strength(config, objective.weight_sum());

  TrainTrace local;
  TrainTrace& out = trace ? *trace : local;
  out = TrainTrace{};

  LinearModel grad = LinearModel::zeros(d, num_classes);
  double f = objective.value_and_gradient(model, grad);
  double big_f = f + c * l1_norm(model.weights);
  if (!std::isfinite(big_f) || !grad.all_finite()) {
    fail(ErrorKind::kDivergence, "objective is not finite at initialization");
  }
  out.objective.push_back(big_f);

  if (config.learning_rate) {
    const int steps = config.max_steps_override.value_or(config.max_iters);
    const double lr = *config.learning_rate;
    for (int s = 0; s < steps; ++s) {
      model = prox_step(model, grad, lr, c);
      f = objective.value_and_gradient(model, grad);
      big_f = f + c * l1_norm(model.weights);
      if (!std::isfinite(big_f) || !model.all_finite()) {
        fail(ErrorKind::kDivergence,
             "objective became non-finite at step " + std::to_string(s + 1));
      }
      out.objective.push_back(big_f);
      out.iterations = s + 1;
    }
    out.converged = true;
    return model;
  }

  double t = config.step.initial_step;
  for (int it = 0; it < config.max_iters; ++it) {
    LinearModel candidate;
    double f_new = 0.0;
    bool accepted = false;
    while (t >= config.step.min_step) {
      candidate = prox_step(model, grad, t, c);
      f_new = objective.value(candidate);
      if (std::isfinite(f_new)) {
        const Eigen::MatrixXd dw = candidate.weights - model.weights;
        const Eigen::VectorXd db = candidate.bias - model.bias;
        const double inner =
            (dw.array() * grad.weights.array()).sum() + db.dot(grad.bias);
        const double sq = dw.squaredNorm() + db.squaredNorm();
        if (f_new <= f + inner + sq / (2.0 * t)) {
          accepted = true;
          break;
        }
      }
      t *= config.step.shrink;
    }
    if (!accepted) {
      out.converged = true;  // no representable descent step remains
      break;
    }
    const double big_f_new = f_new + c * l1_norm(candidate.weights);
    if (!(big_f_new <= big_f)) {
      // Rounding noise at the optimum; keep the better iterate.
      out.converged = true;
      break;
    }
    model = std::move(candidate);
    f = objective.value_and_gradient(model, grad);
    if (!grad.all_finite()) {
      fail(ErrorKind::kDivergence,
           "gradient became non-finite at iteration " + std::to_string(it + 1));
    }
    out.objective.push_back(big_f_new);
    out.iterations = it + 1;
    const double change = big_f - big_f_new;
    big_f = big_f_new;
    if (change <= config.tol * std::max(1.0, std::abs(big_f))) {
      out.converged = true;
      break;
    }
    t *= config.step.grow;
  }
  return model;
}

LinearModel train(const EmbeddingDataset& dataset, const TrainConfig& config,
                  TrainTrace* trace) {
  return train(dataset.features, dataset.labels, dataset.num_classes, config,
               trace);
}

LinearModel finetune(const LinearModel& model, const FeatureMatrix& features,
                     std::span<const std::int32_t> labels, int steps,
                     double learning_rate) {
  if (model.dim() != static_cast<std::size_t>(features.cols())) {
    fail(ErrorKind::kShape, "model dimension does not match features");
  }
  if (steps < 0) fail(ErrorKind::kParameter, "steps must be >= 0");
  if (steps == 0) return model;
  TrainConfig config;
  config.warm_start = model;
  config.max_steps_override = steps;
  config.learning_rate = learning_rate;
  return train(features, labels, model.num_classes(), config);
}

}  // namespace wgaknn
