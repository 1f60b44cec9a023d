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

// wgaknn command-line driver.
//
// Exit codes: 0 success, 1 a sweep cell (or a single fit) failed,
// 2 bad arguments, configuration or input.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wgaknn/dataset.h"
#include "wgaknn/diagnostics.h"
#include "wgaknn/error.h"
#include "wgaknn/groups.h"
#include "wgaknn/knn.h"
#include "wgaknn/linear_model.h"
#include "wgaknn/metrics.h"
#include "wgaknn/noise.h"
#include "wgaknn/report.h"
#include "wgaknn/spread.h"
#include "wgaknn/sweep.h"
#include "wgaknn/synth.h"
#include "wgaknn/trainer.h"

namespace fs = std::filesystem;
using namespace wgaknn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCellFailure = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  fs::path config;
  fs::path out_dir = ".";
  bool inverse_c = false;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

fs::path in_out_dir(const Globals& g, const fs::path& given,
                    const char* fallback) {
  fs::create_directories(g.out_dir);
  if (given.empty()) return g.out_dir / fallback;
  return given.is_absolute() ? given : g.out_dir / given;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

TiePolicy parse_tie(const std::string& name) {
  if (name == "assign_one") return TiePolicy::kAssignOne;
  if (name == "keep_current") return TiePolicy::kKeepCurrent;
  fail(ErrorKind::kParameter, "unknown tie policy '" + name + "'");
}

VoteWeighting parse_weighting(const std::string& name) {
  if (name == "uniform") return VoteWeighting::kUniform;
  if (name == "distance") return VoteWeighting::kDistance;
  fail(ErrorKind::kParameter, "unknown weighting '" + name + "'");
}

// ---- gen-synth --------------------------------------------------------------

struct GenSynthArgs {
  std::optional<std::size_t> d, n_train, n_val, n_test;
  std::optional<int> subclusters;
  std::optional<double> class_sep, domain_shift, train_corr, val_corr;
};

int cmd_gen_synth(const Globals& g, const GenSynthArgs& a) {
  SynthConfig cfg =
      g.config.empty() ? SynthConfig{} : parse_synth_config(read_text(g.config));
  if (g.seed) cfg.seed = *g.seed;
  if (a.d) cfg.d = *a.d;
  if (a.n_train) cfg.sizes.train = *a.n_train;
  if (a.n_val) cfg.sizes.val = *a.n_val;
  if (a.n_test) cfg.sizes.test = *a.n_test;
  if (a.subclusters) cfg.subclusters_per_class = *a.subclusters;
  if (a.class_sep) cfg.class_sep = *a.class_sep;
  if (a.domain_shift) cfg.domain_shift = *a.domain_shift;
  if (a.train_corr) cfg.train_correlation = *a.train_corr;
  if (a.val_corr) cfg.val_correlation = *a.val_corr;
  const SynthSplits splits = generate(cfg);
  write_synth(cfg, splits, g.out_dir);
  std::printf("wrote train/val/test (%zu/%zu/%zu rows, d=%zu) to %s\n",
              splits.train.size(), splits.val.size(), splits.test.size(),
              cfg.d, g.out_dir.string().c_str());
  return kExitOk;
}

// ---- inject-noise -----------------------------------------------------------

struct NoiseArgs {
  fs::path input, output, mask;
  double p = 0.0;
};

int cmd_inject_noise(const Globals& g, const NoiseArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  FlipMask mask;
  const EmbeddingDataset noisy =
      with_symmetric_noise(data, NoiseSpec{a.p, g.seed.value_or(0)}, &mask);
  const fs::path out = in_out_dir(g, a.output, "noisy.emb");
  save_any(noisy, out);
  if (!a.mask.empty()) {
    auto file = open_out(in_out_dir(g, a.mask, "flip_mask.csv"));
    file << "row,flipped\n";
    for (std::size_t i = 0; i < mask.size(); ++i) {
      file << i << ',' << int{mask[i]} << '\n';
    }
  }
  std::size_t flipped = 0;
  for (auto m : mask) flipped += m;
  std::printf("flipped %zu of %zu labels; wrote %s\n", flipped, mask.size(),
              out.string().c_str());
  return kExitOk;
}

// ---- build-graph ------------------------------------------------------------

struct GraphArgs {
  fs::path input, output;
  std::size_t k = 5;
  bool exclude_self = false;
};

int cmd_build_graph(const Globals& g, const GraphArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  const KnnGraph graph = build_knn_graph(data.features, a.k, !a.exclude_self);
  const fs::path out = in_out_dir(g, a.output, "graph.csv");
  write_graph_csv(graph, out);
  std::printf("wrote %zu x %zu neighbor lists to %s\n", graph.num_rows(),
              graph.k(), out.string().c_str());
  return kExitOk;
}

// ---- spread -----------------------------------------------------------------

struct SpreadArgs {
  fs::path input, output;
  std::size_t k = 5;
  int rounds = 1;
  bool exclude_self = false;
  std::string tie = "assign_one";
  std::string weighting = "uniform";
};

int cmd_spread(const Globals& g, const SpreadArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  SpreadConfig cfg{a.k, a.rounds, !a.exclude_self, parse_tie(a.tie),
                   parse_weighting(a.weighting)};
  LabelVector cleaned =
      knn_spread(data.features, data.labels, data.num_classes, cfg);
  const fs::path out = in_out_dir(g, a.output, "spread.emb");
  save_any(data.with_labels(cleaned), out);
  if (data.clean_labels) {
    std::printf("label accuracy before %.4f after %.4f\n",
                measure_label_accuracy(data.labels, *data.clean_labels),
                measure_label_accuracy(cleaned, *data.clean_labels));
  }
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  fs::path input, output, eval;
  double c = 0.0;
  std::string loss = "cross_entropy";
  double alpha = 1.0;
  int max_iters = 1000;
  double tol = 1e-9;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  TrainConfig cfg;
  if (a.loss == "alpha") {
    cfg.loss = LossSpec::alpha_loss(a.alpha);
  } else if (a.loss != "cross_entropy") {
    fail(ErrorKind::kParameter, "unknown loss '" + a.loss + "'");
  }
  cfg.l1_penalty = a.c;
  cfg.penalty_convention =
      g.inverse_c ? PenaltyConvention::kInverse : PenaltyConvention::kDirect;
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  TrainTrace trace;
  const LinearModel model = train(data, cfg, &trace);
  const fs::path out = in_out_dir(g, a.output, "model.csv");
  save_model(model, out, cfg.loss);
  std::printf("objective %.6g after %d iterations (%s), %zu nonzero weights\n",
              trace.objective.back(), trace.iterations,
              trace.converged ? "converged" : "iteration limit",
              model.nonzero_weights());
  if (!a.eval.empty()) {
    const ExperimentResult r = worst_group_accuracy(model, load_any(a.eval));
    std::printf("test wga %.4f overall %.4f\n", r.wga, r.overall_accuracy);
  }
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

int cmd_sweep(const Globals& g) {
  if (g.config.empty()) fail(ErrorKind::kConfig, "sweep needs --config");
  SweepSpec spec = load_sweep_spec(g.config);
  if (g.inverse_c) spec.inverse_c = true;
  if (g.seed) spec.base_seed = *g.seed;
  spec.validate();
  const SweepResult result = run_sweep(spec, g.jobs);
  fs::create_directories(g.out_dir);
  {
    auto out = open_out(g.out_dir / "results.csv");
    write_results_csv(result.results, out);
  }
  {
    auto out = open_out(g.out_dir / "selection.csv");
    write_selection_csv(result.selection, out);
  }
  {
    auto out = open_out(g.out_dir / "failures.csv");
    write_failures_csv(result.failures, out);
  }
  if (!result.results.empty()) {
    const std::string md =
        render_report(result.results, ReportFormat::kMarkdown);
    open_out(g.out_dir / "report.md") << md;
    open_out(g.out_dir / "report.csv")
        << render_report(result.results, ReportFormat::kCsv);
    std::cout << md;
  }
  for (const CellFailure& f : result.failures) {
    std::fprintf(stderr, "%s %s p=%g stage=%s: %s\n",
                 f.fatal ? "FAILED" : "warning", f.method.c_str(),
                 f.noise_level, f.stage.c_str(), f.message.c_str());
  }
  return result.has_cell_failures() ? kExitCellFailure : kExitOk;
}

// ---- spread-diag ------------------------------------------------------------

struct DiagArgs {
  fs::path input, output;
  double p = 0.2;
  std::vector<std::size_t> k = {1, 5, 11, 21, 41};
  std::vector<int> rounds = {0, 1, 2};
  int num_seeds = 10;
  bool exclude_self = false;
  std::string tie = "assign_one";
};

int cmd_spread_diag(const Globals& g, const DiagArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  SpreadDiagConfig cfg;
  cfg.p = a.p;
  cfg.k_grid = a.k;
  cfg.rounds_grid = a.rounds;
  cfg.include_self = !a.exclude_self;
  cfg.tie_policy = parse_tie(a.tie);
  if (a.num_seeds < 1) fail(ErrorKind::kParameter, "--seeds must be >= 1");
  cfg.seeds.clear();
  const std::uint64_t base = g.seed.value_or(0);
  for (int s = 0; s < a.num_seeds; ++s) cfg.seeds.push_back(base + s);
  const auto rows = spread_diagnostic(data, cfg);
  const fs::path out = in_out_dir(g, a.output, "spread_diag.csv");
  {
    auto file = open_out(out);
    write_spread_diag_csv(rows, file);
  }
  write_spread_diag_csv(rows, std::cout);
  return kExitOk;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  fs::path results, output;
  std::string format = "markdown";
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  std::ifstream in(a.results);
  if (!in) fail(ErrorKind::kIo, "cannot open " + a.results.string());
  const auto results = read_results_csv(in);
  const std::string doc =
      render_report(results, parse_report_format(a.format));
  if (a.output.empty()) {
    std::cout << doc;
  } else {
    open_out(in_out_dir(g, a.output, "report.md")) << doc;
  }
  return kExitOk;
}

// ---- project2d --------------------------------------------------------------

struct ProjectArgs {
  fs::path input, output;
};

int cmd_project2d(const Globals& g, const ProjectArgs& a) {
  const EmbeddingDataset data = load_any(a.input);
  const Projection proj = project_pca(data.features, 2);
  const fs::path out = in_out_dir(g, a.output, "projection.csv");
  auto file = open_out(out);
  write_projection_csv(proj, data, file);
  std::printf("explained variance %.4g %.4g; wrote %s\n", proj.variances(0),
              proj.variances(1), out.string().c_str());
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDivergence:
    case ErrorKind::kDegenerateData:
    case ErrorKind::kDegenerateSelection:
    case ErrorKind::kEvaluation:
    case ErrorKind::kAggregation:
      return kExitCellFailure;
    default:
      return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kNN label spreading and last-layer retraining"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (base seed for sweeps)");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "TOML configuration file");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_flag("--inverse-c", g.inverse_c,
               "Read penalties as inverse strengths C (c = 1 / (C * n))");

  GenSynthArgs gs;
  auto* gen = app.add_subcommand("gen-synth", "Generate synthetic splits");
  gen->add_option("--d", gs.d);
  gen->add_option("--n-train", gs.n_train);
  gen->add_option("--n-val", gs.n_val);
  gen->add_option("--n-test", gs.n_test);
  gen->add_option("--subclusters", gs.subclusters);
  gen->add_option("--class-sep", gs.class_sep);
  gen->add_option("--domain-shift", gs.domain_shift);
  gen->add_option("--train-correlation", gs.train_corr);
  gen->add_option("--val-correlation", gs.val_corr);

  NoiseArgs na;
  auto* noise = app.add_subcommand("inject-noise", "Symmetric label noise");
  noise->add_option("--input", na.input)->required();
  noise->add_option("--p", na.p, "Noise rate in [0, 0.5)")->required();
  noise->add_option("--output", na.output);
  noise->add_option("--mask", na.mask, "Also write the flip mask CSV");

  GraphArgs ga;
  auto* graph = app.add_subcommand("build-graph", "Exact kNN graph");
  graph->add_option("--input", ga.input)->required();
  graph->add_option("--k", ga.k);
  graph->add_option("--output", ga.output);
  graph->add_flag("--exclude-self", ga.exclude_self);

  SpreadArgs sa;
  auto* spread = app.add_subcommand("spread", "kNN label spreading");
  spread->add_option("--input", sa.input)->required();
  spread->add_option("--k", sa.k);
  spread->add_option("--rounds", sa.rounds);
  spread->add_option("--output", sa.output);
  spread->add_flag("--exclude-self", sa.exclude_self);
  spread->add_option("--tie-policy", sa.tie)
      ->check(CLI::IsMember({"assign_one", "keep_current"}));
  spread->add_option("--weighting", sa.weighting)
      ->check(CLI::IsMember({"uniform", "distance"}));

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Fit an L1-penalized linear head");
  trn->add_option("--input", ta.input)->required();
  trn->add_option("--c", ta.c, "L1 penalty");
  trn->add_option("--loss", ta.loss)
      ->check(CLI::IsMember({"cross_entropy", "alpha"}));
  trn->add_option("--alpha", ta.alpha);
  trn->add_option("--max-iters", ta.max_iters);
  trn->add_option("--tol", ta.tol);
  trn->add_option("--output", ta.output);
  trn->add_option("--eval", ta.eval, "Test split to score");

  auto* sweep = app.add_subcommand("sweep", "Noise-by-method sweep (--config)");

  DiagArgs da;
  auto* diag = app.add_subcommand("spread-diag", "Spreading accuracy vs k, T");
  diag->add_option("--input", da.input)->required();
  diag->add_option("--p", da.p);
  diag->add_option("--k", da.k)->delimiter(',');
  diag->add_option("--rounds", da.rounds)->delimiter(',');
  diag->add_option("--seeds", da.num_seeds, "Number of seeds from --seed");
  diag->add_option("--output", da.output);
  diag->add_flag("--exclude-self", da.exclude_self);
  diag->add_option("--tie-policy", da.tie)
      ->check(CLI::IsMember({"assign_one", "keep_current"}));

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Tables from results.csv");
  rep->add_option("--results", ra.results)->required();
  rep->add_option("--format", ra.format)
      ->check(CLI::IsMember({"markdown", "csv"}));
  rep->add_option("--output", ra.output);

  ProjectArgs pa;
  auto* proj = app.add_subcommand("project2d", "PCA to two components");
  proj->add_option("--input", pa.input)->required();
  proj->add_option("--output", pa.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_synth(g, gs);
    if (*noise) return cmd_inject_noise(g, na);
    if (*graph) return cmd_build_graph(g, ga);
    if (*spread) return cmd_spread(g, sa);
    if (*trn) return cmd_train(g, ta);
    if (*sweep) return cmd_sweep(g);
    if (*diag) return cmd_spread_diag(g, da);
    if (*rep) return cmd_report(g, ra);
    if (*proj) return cmd_project2d(g, pa);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
