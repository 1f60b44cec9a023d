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

#include "wgaknn/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>

#include "wgaknn/error.h"
#include "wgaknn/knn.h"
#include "wgaknn/metrics.h"
#include "wgaknn/noise.h"

namespace wgaknn {

std::vector<SpreadDiagRow> spread_diagnostic(const EmbeddingDataset& dataset,
                                             const SpreadDiagConfig& config) {
  if (config.k_grid.empty() || config.rounds_grid.empty() ||
      config.seeds.empty()) {
    fail(ErrorKind::kParameter, "k grid, rounds grid and seeds must be non-empty");
  }
  std::vector<std::size_t> ks = config.k_grid;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<int> rounds = config.rounds_grid;
  std::sort(rounds.begin(), rounds.end());
  rounds.erase(std::unique(rounds.begin(), rounds.end()), rounds.end());
  if (rounds.front() < 0) fail(ErrorKind::kParameter, "rounds must be >= 0");

  const LabelVector& clean = dataset.reference_labels();
  const KnnGraph full = build_knn_graph(dataset.features, ks.back(),
                                        config.include_self);
  // acc[k index][rounds index][seed index]
  std::vector<std::vector<std::vector<double>>> acc(
      ks.size(), std::vector<std::vector<double>>(rounds.size()));
  for (std::uint64_t seed : config.seeds) {
    const NoisyLabels noisy = inject_symmetric_noise(
        clean, dataset.num_classes, NoiseSpec{config.p, seed});
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const KnnGraph graph = full.truncated(ks[ki]);
      SpreadConfig step{ks[ki], 0, config.include_self, config.tie_policy,
                        VoteWeighting::kUniform};
      LabelVector labels = noisy.labels;
      int done = 0;
      for (std::size_t ti = 0; ti < rounds.size(); ++ti) {
        step.rounds = rounds[ti] - done;
        labels = spread_labels(graph, labels, dataset.num_classes, step);
        done = rounds[ti];
        acc[ki][ti].push_back(measure_label_accuracy(labels, clean));
      }
    }
  }
  std::vector<SpreadDiagRow> out;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    for (std::size_t ti = 0; ti < rounds.size(); ++ti) {
      const Summary s = summarize(acc[ki][ti]);
      const double half =
          1.96 * s.std / std::sqrt(static_cast<double>(s.count));
      out.push_back({ks[ki], rounds[ti], s.mean, s.std, s.mean - half,
                     s.mean + half, s.count});
    }
  }
  return out;
}

void write_spread_diag_csv(const std::vector<SpreadDiagRow>& rows,
                           std::ostream& out) {
  out << "k,rounds,mean,std,ci_low,ci_high,seeds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.10g,%.10g,%.10g,%.10g,%zu\n",
                  r.k, r.rounds, r.mean, r.std, r.ci_low, r.ci_high, r.seeds);
    out << buf;
  }
}

Projection project_pca(const FeatureMatrix& features, int components) {
  if (components < 1 || components > features.cols()) {
    fail(ErrorKind::kParameter, "components must lie in [1, d]");
  }
  if (features.rows() < 1) fail(ErrorKind::kShape, "no rows to project");
  const Eigen::MatrixXd x = features.cast<double>();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kDivergence, "eigendecomposition failed");
  }
  const auto d = cov.rows();
  Eigen::MatrixXd basis(d, components);
  Projection out;
  out.variances.resize(components);
  for (int c = 0; c < components; ++c) {
    // Eigenvalues come in ascending order.
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index top = 0;
    v.cwiseAbs().maxCoeff(&top);
    if (v(top) < 0) v = -v;
    basis.col(c) = v;
    out.variances(c) = solver.eigenvalues()(d - 1 - c);
  }
  out.coords = centered * basis;
  return out;
}

void write_projection_csv(const Projection& projection,
                          const EmbeddingDataset& dataset, std::ostream& out) {
  if (static_cast<std::size_t>(projection.coords.rows()) != dataset.size()) {
    fail(ErrorKind::kShape, "projection and dataset differ in rows");
  }
  for (Eigen::Index c = 0; c < projection.coords.cols(); ++c) {
    out << (c ? "," : "") << "pc" << (c + 1);
  }
  out << ",label";
  if (dataset.domains) out << ",domain";
  if (dataset.clean_labels) out << ",clean_label";
  out << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    for (Eigen::Index c = 0; c < projection.coords.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", projection.coords(i, c));
      out << (c ? "," : "") << buf;
    }
    const auto r = static_cast<std::size_t>(i);
    out << ',' << dataset.labels[r];
    if (dataset.domains) out << ',' << (*dataset.domains)[r];
    if (dataset.clean_labels) out << ',' << (*dataset.clean_labels)[r];
    out << '\n';
  }
}

}  // namespace wgaknn
