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

#include "wgaknn/linear_model.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

void check_dim(const LinearModel& model, const FeatureMatrix& features) {
  if (static_cast<std::size_t>(features.cols()) != model.dim()) {
    fail(ErrorKind::kShape, "model expects d=" + std::to_string(model.dim()) +
                                " but features have d=" +
                                std::to_string(features.cols()));
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto out = path;
  out += ".json";
  return out;
}

}  // namespace

std::string LossSpec::name() const {
  return kind == LossKind::kCrossEntropy ? "cross_entropy" : "alpha";
}

void LossSpec::validate() const {
  if (kind == LossKind::kAlpha && !(alpha > 0.0 && std::isfinite(alpha))) {
    fail(ErrorKind::kParameter,
         "alpha must be a positive finite number, got " + std::to_string(alpha));
  }
}

LinearModel LinearModel::zeros(std::size_t dim, int num_classes) {
  LinearModel model;
  model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                        num_classes);
  model.bias = Eigen::VectorXd::Zero(num_classes);
  return model;
}

std::size_t LinearModel::nonzero_weights() const {
  return static_cast<std::size_t>((weights.array() != 0.0).count());
}

bool LinearModel::operator==(const LinearModel& other) const {
  return weights.rows() == other.weights.rows() &&
         weights.cols() == other.weights.cols() &&
         bias.size() == other.bias.size() && weights == other.weights &&
         bias == other.bias;
}

Eigen::MatrixXd class_scores(const LinearModel& model,
                             const FeatureMatrix& features) {
  check_dim(model, features);
  Eigen::MatrixXd scores = features.cast<double>() * model.weights;
  scores.rowwise() += model.bias.transpose();
  return scores;
}

Eigen::MatrixXd predict_proba(const LinearModel& model,
                              const FeatureMatrix& features) {
  Eigen::MatrixXd scores = class_scores(model, features);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - top).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

LabelVector predict(const LinearModel& model, const FeatureMatrix& features) {
  const Eigen::MatrixXd scores = class_scores(model, features);
  LabelVector out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(best);
  }
  return out;
}

double alpha_loss_from_log(double alpha, double log_prob) {
  const double eps = (alpha - 1.0) / alpha;
  if (eps == 0.0) return -log_prob;
  return -std::expm1(eps * log_prob) / eps;
}

double alpha_loss(double alpha, double prob_of_true_class) {
  if (!(alpha > 0.0)) {
    fail(ErrorKind::kParameter, "alpha must be > 0");
  }
  if (!(prob_of_true_class > 0.0 && prob_of_true_class <= 1.0)) {
    fail(ErrorKind::kParameter, "probability must lie in (0, 1]");
  }
  return alpha_loss_from_log(alpha, std::log(prob_of_true_class));
}

std::vector<double> per_example_loss(const LinearModel& model,
                                     const FeatureMatrix& features,
                                     std::span<const std::int32_t> labels,
                                     const LossSpec& loss) {
  loss.validate();
  const Eigen::MatrixXd scores = class_scores(model, features);
  if (labels.size() != static_cast<std::size_t>(scores.rows())) {
    fail(ErrorKind::kShape, "labels do not match feature rows");
  }
  const double alpha = loss.kind == LossKind::kAlpha ? loss.alpha : 1.0;
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = scores.row(static_cast<Eigen::Index>(i));
    const double top = row.maxCoeff();
    const double lse = top + std::log((row.array() - top).exp().sum());
    const double log_p = row(labels[i]) - lse;
    // Clamp the last ulp of rounding so a perfect prediction reports 0.
    out[i] = std::max(0.0, alpha_loss_from_log(alpha, std::min(log_p, 0.0)));
  }
  return out;
}

void save_model(const LinearModel& model, const std::filesystem::path& path,
                const LossSpec& loss) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  for (int c = 0; c < model.num_classes(); ++c) {
    out << (c ? "," : "") << "class_" << c;
  }
  out << '\n';
  char buf[40];
  auto write_row = [&](auto&& value_at) {
    for (int c = 0; c < model.num_classes(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", value_at(c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  };
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    write_row([&](int c) { return model.weights(r, c); });
  }
  write_row([&](int c) { return model.bias(c); });

  nlohmann::json meta = {{"num_classes", model.num_classes()},
                         {"d", model.dim()},
                         {"loss", loss.name()}};
  if (loss.kind == LossKind::kAlpha) meta["alpha"] = loss.alpha;
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) fail(ErrorKind::kIo, "cannot write model sidecar");
  side << meta.dump(2) << '\n';
}

LinearModel load_model(const std::filesystem::path& path, LossSpec* loss_out) {
  std::ifstream side(sidecar_path(path));
  if (!side) fail(ErrorKind::kIo, "missing model sidecar for " + path.string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("bad model sidecar: ") + e.what());
  }
  const int num_classes = meta.value("num_classes", 0);
  const std::size_t d = meta.value("d", std::size_t{0});
  if (num_classes < 1 || d < 1) fail(ErrorKind::kFormat, "bad model shape");
  if (loss_out) {
    *loss_out = meta.value("loss", std::string("cross_entropy")) == "alpha"
                    ? LossSpec::alpha_loss(meta.value("alpha", 1.0))
                    : LossSpec::cross_entropy();
  }

  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  LinearModel model = LinearModel::zeros(d, num_classes);
  for (std::size_t r = 0; r <= d; ++r) {
    if (!std::getline(in, line)) fail(ErrorKind::kFormat, "model CSV truncated");
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c < num_classes; ++c) {
      if (!std::getline(row, cell, ',')) {
        fail(ErrorKind::kFormat, "model CSV row too short");
      }
      double v = 0.0;
      try {
        v = std::stod(cell);
      } catch (const std::logic_error&) {
        fail(ErrorKind::kFormat, "unparseable model value '" + cell + "'");
      }
      if (r < d) {
        model.weights(static_cast<Eigen::Index>(r), c) = v;
      } else {
        model.bias(c) = v;
      }
    }
  }
  if (!model.all_finite()) fail(ErrorKind::kValidation, "non-finite model");
  return model;
}

}  // namespace wgaknn
