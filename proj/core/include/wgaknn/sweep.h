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

// Noise-by-method experiment sweeps.
//
// For every (method, noise level):
//   1. For each listed seed, inject symmetric noise into the validation
//      split and divide it into a noisy retrain half and a clean holdout.
//   2. Fit every hyperparameter point on each retrain half and score its
//      worst-group accuracy on the matching holdout.
//   3. Keep the point with the best mean holdout WGA (lowest index on ties).
//   4. Refit that point once per seed on the full noisy validation split
//      (or only on the retrain half) and score it on the test split.
//
// Random streams:
//   noise seed   H(base, "noise", p, seed)
//   split seed   H(base, "split", p, seed)
//   task seed    H(base, method, p, hyper index, seed index)
// with H = splitmix64 finalizer of FNV-1a-64 over the little-endian bytes of
// the fields (strings NUL-terminated, p as its IEEE-754 bit pattern).
//
// TOML layout:
//
//   methods = ["erm", "rad", "knn-rad"]
//   noise_levels = [0.0, 0.1, 0.2, 0.3]
//   seeds = [0, 1, 2]
//   base_seed = 0
//   inverse_c = false
//   split_fraction = 0.5
//   final_fit = "full"            # or "retrain"
//   [train]      max_iters, tol
//   [base_model] c                # SELF base model, fit on the train split
//   [data]       val, test, train, base_model (paths, relative to the file)
//   [data.synthetic]  SynthConfig fields, replaces the paths
//   [<method>]   one list (or scalar) per hyperparameter, see below
//
// Hyperparameters per method:
//   erm, guw, gds      c
//   rad                c_id, c_retrain, upweight, id_loss, alpha
//   knn-rad            rad's, plus k, rounds, include_self, zero_noise_k
//   self               n_sub, finetune_steps, learning_rate
//   knn-self           self's, plus k, rounds, include_self, zero_noise_k
// zero_noise_k replaces the k grid at p = 0 (0 keeps the grid).
// lr_id and epochs_id are accepted for rad and knn-rad and only recorded.

#ifndef WGAKNN_SWEEP_H_
#define WGAKNN_SWEEP_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "wgaknn/dataset.h"
#include "wgaknn/linear_model.h"
#include "wgaknn/methods.h"
#include "wgaknn/metrics.h"
#include "wgaknn/spread.h"
#include "wgaknn/synth.h"

namespace wgaknn {

using HyperPoint = std::map<std::string, double>;

struct MethodSpec {
  MethodKind kind = MethodKind::kErm;
  std::map<std::string, std::vector<double>> grid;
  LossSpec id_loss;
  bool include_self = true;
  TiePolicy tie_policy = TiePolicy::kAssignOne;
  std::size_t zero_noise_k = 1;
  std::map<std::string, double> recorded;  // informational keys

  // Cartesian product of the grid in key order; the last key varies fastest.
  std::vector<HyperPoint> expand(double noise_level) const;
};

// Shipped defaults (CelebA row for the two-stage methods).
MethodSpec default_method_spec(MethodKind kind);

enum class FinalFit { kFullValidation, kRetrainHalf };

struct DataSource {
  std::optional<SynthConfig> synthetic;
  std::filesystem::path val;
  std::filesystem::path test;
  std::filesystem::path train;       // optional
  std::filesystem::path base_model;  // optional
};

struct SweepSpec {
  std::vector<MethodSpec> methods;
  std::vector<double> noise_levels = {0.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t base_seed = 0;
  double split_fraction = 0.5;
  bool inverse_c = false;
  FinalFit final_fit = FinalFit::kFullValidation;
  int max_iters = 1000;
  double tol = 1e-9;
  double base_model_c = 0.0;
  DataSource data;

  // Parameter error on empty lists, duplicate seeds, bad noise levels.
  void validate() const;
};

// Config errors for malformed TOML or unknown keys.
SweepSpec parse_sweep_spec(std::string_view toml_text,
                           const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_spec(const std::filesystem::path& path);

// SynthConfig from a [data.synthetic] table, a [synthetic] table, or
// top-level keys: num_classes, num_domains, d, n_train, n_val, n_test,
// train_correlation, val_correlation, class_sep, domain_shift,
// subclusters_per_class, subcluster_spacing, satellite_fraction,
// within_std, seed.
SynthConfig parse_synth_config(std::string_view toml_text);

struct SweepData {
  EmbeddingDataset val;
  EmbeddingDataset test;
  std::optional<EmbeddingDataset> train;
  std::optional<LinearModel> base_model;
};

SweepData load_sweep_data(const SweepSpec& spec);

std::uint64_t noise_seed(std::uint64_t base, double p, std::uint64_t seed);
std::uint64_t split_seed(std::uint64_t base, double p, std::uint64_t seed);
std::uint64_t task_seed(std::uint64_t base, std::string_view method, double p,
                        std::size_t hyper_index, std::size_t seed_index);

struct FitContext {
  const LinearModel* base_model = nullptr;  // required by self, knn-self
  std::uint64_t seed = 0;                   // gds subsample, self balance
  bool inverse_c = false;
  int max_iters = 1000;
  double tol = 1e-9;
};

struct FitOutcome {
  LinearModel model;
  std::optional<ErrorSet> error_set;
  std::optional<LabelVector> cleaned_labels;
};

// One method at one hyperparameter point. guw and gds derive oracle groups
// from the clean labels and domains of `retrain`.
FitOutcome fit_method(const MethodSpec& method, const HyperPoint& point,
                      const EmbeddingDataset& retrain, const FitContext& context,
                      int num_domains = 0);

struct SelectionRow {
  std::string method;
  double noise_level = 0.0;
  std::size_t hyper_index = 0;
  HyperPoint params;
  std::optional<double> mean_holdout_wga;  // absent when nothing to select
  std::size_t seeds_ok = 0;
  bool selected = false;
};

struct CellFailure {
  std::string method;
  double noise_level = 0.0;
  std::string stage;  // "select", "final" or "cell"
  std::optional<std::size_t> hyper_index;
  std::optional<std::uint64_t> seed;
  std::string kind;
  std::string message;
  bool fatal = false;  // the cell's table entry is incomplete
};

struct SweepResult {
  std::vector<ExperimentResult> results;  // test rows, sorted
  std::vector<SelectionRow> selection;
  std::vector<CellFailure> failures;

  bool has_cell_failures() const;
};

SweepResult run_sweep(const SweepSpec& spec, const SweepData& data,
                      int jobs = 1);
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1);

std::string format_hyper(const HyperPoint& point);
void write_selection_csv(const std::vector<SelectionRow>& rows,
                         std::ostream& out);
void write_failures_csv(const std::vector<CellFailure>& failures,
                        std::ostream& out);

}  // namespace wgaknn

#endif  // WGAKNN_SWEEP_H_
