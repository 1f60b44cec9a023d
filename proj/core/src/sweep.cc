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

#include "wgaknn/sweep.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <utility>

#include "toml.hpp"

#include "wgaknn/error.h"
#include "wgaknn/groups.h"
#include "wgaknn/noise.h"
#include "wgaknn/split.h"

namespace wgaknn {
namespace {

[[noreturn]] void config_error(const std::string& message) {
  fail(ErrorKind::kConfig, message);
}

// ---- seeds ---------------------------------------------------------------

class SeedHasher {
 public:
  explicit SeedHasher(std::uint64_t base) { add(base); }

  SeedHasher& add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) byte(static_cast<std::uint8_t>(v >> (8 * b)));
    return *this;
  }
  SeedHasher& add(double v) { return add(std::bit_cast<std::uint64_t>(v)); }
  SeedHasher& add(std::string_view s) {
    for (char ch : s) byte(static_cast<std::uint8_t>(ch));
    byte(0);
    return *this;
  }

  std::uint64_t finish() const {
    std::uint64_t x = state_;
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  void byte(std::uint8_t b) {
    state_ ^= b;
    state_ *= 0x100000001b3ULL;
  }
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// ---- TOML helpers --------------------------------------------------------

std::vector<double> number_list(const toml::node& node, const std::string& key) {
  std::vector<double> out;
  auto push = [&](const toml::node& item) {
    if (!item.is_number()) config_error("'" + key + "' must be numeric");
    out.push_back(*item.value<double>());
  };
  if (const auto* arr = node.as_array()) {
    for (const auto& item : *arr) push(item);
  } else {
    push(node);
  }
  if (out.empty()) config_error("'" + key + "' must not be empty");
  return out;
}

double number(const toml::node& node, const std::string& key) {
  if (!node.is_number()) config_error("'" + key + "' must be a number");
  return *node.value<double>();
}

std::int64_t integer(const toml::node& node, const std::string& key) {
  if (!node.is_integer()) config_error("'" + key + "' must be an integer");
  return *node.value<std::int64_t>();
}

std::uint64_t unsigned_integer(const toml::node& node, const std::string& key) {
  const std::int64_t v = integer(node, key);
  if (v < 0) config_error("'" + key + "' must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool boolean(const toml::node& node, const std::string& key) {
  if (!node.is_boolean()) config_error("'" + key + "' must be true or false");
  return *node.value<bool>();
}

std::string string(const toml::node& node, const std::string& key) {
  if (!node.is_string()) config_error("'" + key + "' must be a string");
  return *node.value<std::string>();
}

const toml::table& table(const toml::node& node, const std::string& key) {
  const auto* t = node.as_table();
  if (!t) config_error("'" + key + "' must be a table");
  return *t;
}

std::vector<std::string> grid_keys(MethodKind kind) {
  switch (kind) {
    case MethodKind::kErm:
    case MethodKind::kGuw:
    case MethodKind::kGds:
      return {"c"};
    case MethodKind::kRad:
      return {"c_id", "c_retrain", "upweight"};
    case MethodKind::kKnnRad:
      return {"c_id", "c_retrain", "upweight", "k", "rounds"};
    case MethodKind::kSelf:
      return {"n_sub", "finetune_steps", "learning_rate"};
    case MethodKind::kKnnSelf:
      return {"n_sub", "finetune_steps", "learning_rate", "k", "rounds"};
  }
  return {};
}

void apply_method_table(MethodSpec& spec, const toml::table& t,
                        const std::string& name) {
  const auto keys = grid_keys(spec.kind);
  const bool rad_like =
      spec.kind == MethodKind::kRad || spec.kind == MethodKind::kKnnRad;
  const bool knn = uses_spreading(spec.kind);
  std::optional<std::string> loss_name;
  std::optional<double> alpha;
  for (const auto& [k, node] : t) {
    const std::string key(k.str());
    const std::string where = name + "." + key;
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) {
      spec.grid[key] = number_list(node, where);
    } else if (rad_like && key == "id_loss") {
      loss_name = string(node, where);
    } else if (rad_like && key == "alpha") {
      alpha = number(node, where);
    } else if (rad_like && (key == "lr_id" || key == "epochs_id")) {
      spec.recorded[key] = number(node, where);
    } else if (knn && key == "include_self") {
      spec.include_self = boolean(node, where);
    } else if (knn && key == "tie_policy") {
      const std::string policy = string(node, where);
      if (policy == "assign_one") {
        spec.tie_policy = TiePolicy::kAssignOne;
      } else if (policy == "keep_current") {
        spec.tie_policy = TiePolicy::kKeepCurrent;
      } else {
        config_error("'" + where + "' must be assign_one or keep_current");
      }
    } else if (knn && key == "zero_noise_k") {
      const auto v = integer(node, where);
      if (v < 0) config_error("'" + where + "' must be >= 0");
      spec.zero_noise_k = static_cast<std::size_t>(v);
    } else {
      config_error("unknown key '" + where + "'");
    }
  }
  if (loss_name) {
    if (*loss_name == "cross_entropy") {
      spec.id_loss = LossSpec::cross_entropy();
    } else if (*loss_name == "alpha") {
      spec.id_loss = LossSpec::alpha_loss(alpha.value_or(spec.id_loss.alpha));
    } else {
      config_error("'" + name + ".id_loss' must be cross_entropy or alpha");
    }
  } else if (alpha) {
    spec.id_loss = LossSpec::alpha_loss(*alpha);
  }
  try {
    spec.id_loss.validate();
  } catch (const Error& e) {
    config_error(name + ": " + e.what());
  }
}

SynthConfig synth_from_table(const toml::table& t, const std::string& name) {
  SynthConfig c;
  for (const auto& [k, node] : t) {
    const std::string key(k.str());
    const std::string where = name + "." + key;
    if (key == "num_classes") {
      c.num_classes = static_cast<int>(integer(node, where));
    } else if (key == "num_domains") {
      c.num_domains = static_cast<int>(integer(node, where));
    } else if (key == "d") {
      c.d = static_cast<std::size_t>(unsigned_integer(node, where));
    } else if (key == "n_train") {
      c.sizes.train = static_cast<std::size_t>(unsigned_integer(node, where));
    } else if (key == "n_val") {
      c.sizes.val = static_cast<std::size_t>(unsigned_integer(node, where));
    } else if (key == "n_test") {
      c.sizes.test = static_cast<std::size_t>(unsigned_integer(node, where));
    } else if (key == "train_correlation") {
      c.train_correlation = number(node, where);
    } else if (key == "val_correlation") {
      c.val_correlation = number(node, where);
    } else if (key == "class_sep") {
      c.class_sep = number(node, where);
    } else if (key == "domain_shift") {
      c.domain_shift = number(node, where);
    } else if (key == "subclusters_per_class") {
      c.subclusters_per_class = static_cast<int>(integer(node, where));
    } else if (key == "subcluster_spacing") {
      c.subcluster_spacing = number(node, where);
    } else if (key == "satellite_fraction") {
      c.satellite_fraction = number(node, where);
    } else if (key == "within_std") {
      c.within_std = number(node, where);
    } else if (key == "seed") {
      c.seed = unsigned_integer(node, where);
    } else {
      config_error("unknown key '" + where + "'");
    }
  }
  return c;
}

toml::table parse_toml(std::string_view text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": "
        << e.description();
    config_error(msg.str());
  }
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  }
  return out;
}

// ---- execution -----------------------------------------------------------

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::pair<std::string, std::string> describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const Error& e) {
    return {std::string(error_kind_name(e.kind())), e.what()};
  } catch (const std::exception& e) {
    return {"internal", e.what()};
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_quote(const std::string& text) {
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

long long integer_param(const HyperPoint& point, const std::string& name,
                        long long minimum) {
  auto it = point.find(name);
  if (it == point.end()) {
    fail(ErrorKind::kParameter, "missing hyperparameter '" + name + "'");
  }
  const double v = it->second;
  if (!(v == std::floor(v)) || v < static_cast<double>(minimum)) {
    fail(ErrorKind::kParameter, "hyperparameter '" + name +
                                    "' must be an integer >= " +
                                    std::to_string(minimum));
  }
  return static_cast<long long>(v);
}

double real_param(const HyperPoint& point, const std::string& name) {
  auto it = point.find(name);
  if (it == point.end()) {
    fail(ErrorKind::kParameter, "missing hyperparameter '" + name + "'");
  }
  return it->second;
}

}  // namespace

std::vector<HyperPoint> MethodSpec::expand(double noise_level) const {
  auto grid_copy = grid;
  if (uses_spreading(kind) && noise_level == 0.0 && zero_noise_k > 0) {
    grid_copy["k"] = {static_cast<double>(zero_noise_k)};
  }
  std::vector<HyperPoint> points(1);
  for (const auto& [key, values] : grid_copy) {
    std::vector<HyperPoint> next;
    for (const auto& partial : points) {
      for (double v : values) {
        HyperPoint p = partial;
        p[key] = v;
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

MethodSpec default_method_spec(MethodKind kind) {
  MethodSpec spec;
  spec.kind = kind;
  switch (kind) {
    case MethodKind::kErm:
    case MethodKind::kGuw:
    case MethodKind::kGds:
      spec.grid["c"] = log_grid(1e-4, 1.0, 10);
      break;
    case MethodKind::kRad:
      spec.grid = {{"c_id", {6.16e-4}},
                   {"c_retrain", {0.007848}},
                   {"upweight", {5, 10, 25, 50}}};
      break;
    case MethodKind::kKnnRad:
      spec.grid = {{"c_id", {6.16e-4}},
                   {"c_retrain", {0.007848}},
                   {"upweight", {10, 25, 50, 75}},
                   {"k", {5, 11, 21}},
                   {"rounds", {1}}};
      break;
    case MethodKind::kSelf:
      spec.grid = {{"n_sub", {2, 20, 100}},
                   {"finetune_steps", {500}},
                   {"learning_rate", {1e-6, 1e-5, 1e-4}}};
      break;
    case MethodKind::kKnnSelf:
      spec.grid = {{"n_sub", {2}},
                   {"finetune_steps", {500}},
                   {"learning_rate", {1e-5}},
                   {"k", {11, 25, 37}},
                   {"rounds", {1}}};
      break;
  }
  return spec;
}

void SweepSpec::validate() const {
  if (methods.empty()) fail(ErrorKind::kParameter, "no methods selected");
  if (noise_levels.empty()) fail(ErrorKind::kParameter, "no noise levels");
  if (seeds.empty()) fail(ErrorKind::kParameter, "no seeds");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    fail(ErrorKind::kParameter, "seed list contains duplicates");
  }
  std::set<double> unique_noise(noise_levels.begin(), noise_levels.end());
  if (unique_noise.size() != noise_levels.size()) {
    fail(ErrorKind::kParameter, "noise level list contains duplicates");
  }
  for (double p : noise_levels) {
    if (!(p >= 0.0 && p < 0.5)) {
      fail(ErrorKind::kParameter, "noise levels must lie in [0, 0.5)");
    }
  }
  std::set<MethodKind> kinds;
  for (const auto& m : methods) {
    if (!kinds.insert(m.kind).second) {
      fail(ErrorKind::kParameter, "method listed twice: " +
                                      std::string(method_name(m.kind)));
    }
    for (const auto& [key, values] : m.grid) {
      if (values.empty()) {
        fail(ErrorKind::kParameter, std::string(method_name(m.kind)) + "." +
                                        key + " has no values");
      }
    }
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    fail(ErrorKind::kParameter, "split_fraction must lie in (0, 1)");
  }
  if (max_iters < 1 || !(tol > 0.0)) {
    fail(ErrorKind::kParameter, "train.max_iters must be >= 1 and tol > 0");
  }
  if (!data.synthetic && (data.val.empty() || data.test.empty())) {
    fail(ErrorKind::kParameter, "data needs val and test paths or a synthetic table");
  }
  if (data.synthetic) data.synthetic->validate();
}

SweepSpec parse_sweep_spec(std::string_view toml_text,
                           const std::filesystem::path& base_dir) {
  const toml::table root = parse_toml(toml_text);
  SweepSpec spec;
  std::vector<std::string> method_names;
  std::map<std::string, const toml::table*> method_tables;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  for (const auto& [k, node] : root) {
    const std::string key(k.str());
    if (key == "methods") {
      const auto* arr = node.as_array();
      if (!arr) config_error("'methods' must be an array of strings");
      for (const auto& item : *arr) method_names.push_back(string(item, key));
    } else if (key == "noise_levels") {
      spec.noise_levels = number_list(node, key);
    } else if (key == "seeds") {
      spec.seeds.clear();
      const auto* arr = node.as_array();
      if (!arr) config_error("'seeds' must be an array of integers");
      for (const auto& item : *arr) spec.seeds.push_back(unsigned_integer(item, key));
    } else if (key == "base_seed") {
      spec.base_seed = unsigned_integer(node, key);
    } else if (key == "inverse_c") {
      spec.inverse_c = boolean(node, key);
    } else if (key == "split_fraction") {
      spec.split_fraction = number(node, key);
    } else if (key == "final_fit") {
      const std::string mode = string(node, key);
      if (mode == "full") {
        spec.final_fit = FinalFit::kFullValidation;
      } else if (mode == "retrain") {
        spec.final_fit = FinalFit::kRetrainHalf;
      } else {
        config_error("'final_fit' must be full or retrain");
      }
    } else if (key == "name" || key == "description") {
      string(node, key);
    } else if (key == "train") {
      for (const auto& [tk, tn] : table(node, key)) {
        const std::string sub(tk.str());
        if (sub == "max_iters") {
          spec.max_iters = static_cast<int>(integer(tn, "train.max_iters"));
        } else if (sub == "tol") {
          spec.tol = number(tn, "train.tol");
        } else {
          config_error("unknown key 'train." + sub + "'");
        }
      }
    } else if (key == "base_model") {
      for (const auto& [tk, tn] : table(node, key)) {
        const std::string sub(tk.str());
        if (sub == "c") {
          spec.base_model_c = number(tn, "base_model.c");
        } else {
          config_error("unknown key 'base_model." + sub + "'");
        }
      }
    } else if (key == "data") {
      for (const auto& [dk, dn] : table(node, key)) {
        const std::string sub(dk.str());
        const std::string where = "data." + sub;
        if (sub == "synthetic") {
          spec.data.synthetic = synth_from_table(table(dn, where), where);
        } else if (sub == "val") {
          spec.data.val = resolve(string(dn, where));
        } else if (sub == "test") {
          spec.data.test = resolve(string(dn, where));
        } else if (sub == "train") {
          spec.data.train = resolve(string(dn, where));
        } else if (sub == "base_model") {
          spec.data.base_model = resolve(string(dn, where));
        } else {
          config_error("unknown key '" + where + "'");
        }
      }
    } else {
      bool is_method = false;
      for (MethodKind kind : all_methods()) {
        if (method_name(kind) == key) is_method = true;
      }
      if (!is_method) config_error("unknown key '" + key + "'");
      method_tables[key] = &table(node, key);
    }
  }
  if (method_names.empty()) {
    for (MethodKind kind : all_methods()) {
      method_names.emplace_back(method_name(kind));
    }
  }
  for (const auto& name : method_names) {
    MethodKind kind;
    try {
      kind = parse_method(name);
    } catch (const Error&) {
      config_error("unknown method '" + name + "'");
    }
    MethodSpec m = default_method_spec(kind);
    if (auto it = method_tables.find(name); it != method_tables.end()) {
      apply_method_table(m, *it->second, name);
    }
    spec.methods.push_back(std::move(m));
  }
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sweep_spec(buffer.str(), path.parent_path());
}

SynthConfig parse_synth_config(std::string_view toml_text) {
  const toml::table root = parse_toml(toml_text);
  if (const auto* data = root["data"].as_table()) {
    if (const auto* synth = (*data)["synthetic"].as_table()) {
      return synth_from_table(*synth, "data.synthetic");
    }
  }
  if (const auto* synth = root["synthetic"].as_table()) {
    return synth_from_table(*synth, "synthetic");
  }
  return synth_from_table(root, "synthetic");
}

SweepData load_sweep_data(const SweepSpec& spec) {
  SweepData data;
  if (spec.data.synthetic) {
    SynthSplits splits = generate(*spec.data.synthetic);
    data.train = std::move(splits.train);
    data.val = std::move(splits.val);
    data.test = std::move(splits.test);
  } else {
    data.val = load_any(spec.data.val, SplitTag::kRetrain);
    data.test = load_any(spec.data.test, SplitTag::kTest);
    if (!spec.data.train.empty()) {
      data.train = load_any(spec.data.train, SplitTag::kTrain);
    }
    if (!spec.data.base_model.empty()) {
      data.base_model = load_model(spec.data.base_model);
    }
  }
  if (!data.val.domains || !data.test.domains) {
    fail(ErrorKind::kMissingAnnotation,
         "validation and test splits need domain labels for group evaluation");
  }
  return data;
}

std::uint64_t noise_seed(std::uint64_t base, double p, std::uint64_t seed) {
  return SeedHasher(base).add(std::string_view("noise")).add(p).add(seed).finish();
}

std::uint64_t split_seed(std::uint64_t base, double p, std::uint64_t seed) {
  return SeedHasher(base).add(std::string_view("split")).add(p).add(seed).finish();
}

std::uint64_t task_seed(std::uint64_t base, std::string_view method, double p,
                        std::size_t hyper_index, std::size_t seed_index) {
  return SeedHasher(base)
      .add(method)
      .add(p)
      .add(static_cast<std::uint64_t>(hyper_index))
      .add(static_cast<std::uint64_t>(seed_index))
      .finish();
}

FitOutcome fit_method(const MethodSpec& method, const HyperPoint& point,
                      const EmbeddingDataset& retrain, const FitContext& context,
                      int num_domains) {
  TrainConfig base;
  base.penalty_convention =
      context.inverse_c ? PenaltyConvention::kInverse : PenaltyConvention::kDirect;
  base.max_iters = context.max_iters;
  base.tol = context.tol;

  auto spread_config = [&]() {
    SpreadConfig s;
    s.k = static_cast<std::size_t>(integer_param(point, "k", 1));
    s.rounds = static_cast<int>(integer_param(point, "rounds", 0));
    s.include_self = method.include_self;
    s.tie_policy = method.tie_policy;
    return s;
  };
  auto rad_config = [&]() {
    RadConfig r;
    r.c_id = real_param(point, "c_id");
    r.c_retrain = real_param(point, "c_retrain");
    r.upweight = real_param(point, "upweight");
    r.id_loss = method.id_loss;
    r.base = base;
    return r;
  };
  auto self_config = [&]() {
    SelfConfig s;
    s.n_sub = static_cast<std::size_t>(integer_param(point, "n_sub", 1));
    s.finetune_steps = static_cast<int>(integer_param(point, "finetune_steps", 0));
    s.learning_rate = real_param(point, "learning_rate");
    s.balance_seed = context.seed;
    return s;
  };
  auto base_model = [&]() -> const LinearModel& {
    if (!context.base_model) {
      fail(ErrorKind::kMissingAnnotation,
           std::string(method_name(method.kind)) +
               " needs a base model (data.base_model or a train split)");
    }
    return *context.base_model;
  };

  FitOutcome out;
  switch (method.kind) {
    case MethodKind::kErm:
      out.model = run_erm(retrain, real_param(point, "c"), base);
      break;
    case MethodKind::kGuw:
      out.model = run_guw(retrain,
                          derive_groups(retrain, GroupLabels::kClean, num_domains),
                          real_param(point, "c"), base);
      break;
    case MethodKind::kGds:
      out.model = run_gds(retrain,
                          derive_groups(retrain, GroupLabels::kClean, num_domains),
                          real_param(point, "c"), context.seed, base);
      break;
    case MethodKind::kRad: {
      RadOutput r = run_rad(retrain, rad_config());
      out.model = std::move(r.model);
      out.error_set = std::move(r.error_set);
      break;
    }
    case MethodKind::kKnnRad: {
      KnnRadOutput r = run_knn_rad(retrain, spread_config(), rad_config());
      out.model = std::move(r.rad.model);
      out.error_set = std::move(r.rad.error_set);
      out.cleaned_labels = std::move(r.cleaned_labels);
      break;
    }
    case MethodKind::kSelf: {
      SelfOutput s = run_self(retrain, base_model(), self_config());
      out.model = std::move(s.model);
      out.error_set = std::move(s.error_set);
      break;
    }
    case MethodKind::kKnnSelf: {
      KnnSelfOutput s =
          run_knn_self(retrain, base_model(), spread_config(), self_config());
      out.model = std::move(s.self.model);
      out.error_set = std::move(s.self.error_set);
      out.cleaned_labels = std::move(s.cleaned_labels);
      break;
    }
  }
  return out;
}

bool SweepResult::has_cell_failures() const {
  return std::any_of(failures.begin(), failures.end(),
                     [](const CellFailure& f) { return f.fatal; });
}

SweepResult run_sweep(const SweepSpec& spec, const SweepData& data, int jobs) {
  spec.validate();
  const std::size_t num_noise = spec.noise_levels.size();
  const std::size_t num_seeds = spec.seeds.size();
  const int num_domains =
      std::max(data.val.num_domains(), data.test.num_domains());

  struct Prepared {
    EmbeddingDataset noisy_val;
    ValidationSplit split;
    GroupTable holdout_groups;
  };
  std::vector<Prepared> prepared(num_noise * num_seeds);
  const EmbeddingDataset clean_val =
      data.val.with_labels(data.val.reference_labels());
  for (std::size_t pi = 0; pi < num_noise; ++pi) {
    const double p = spec.noise_levels[pi];
    for (std::size_t si = 0; si < num_seeds; ++si) {
      Prepared& prep = prepared[pi * num_seeds + si];
      prep.noisy_val = with_symmetric_noise(
          clean_val, NoiseSpec{p, noise_seed(spec.base_seed, p, spec.seeds[si])});
      prep.split = split_validation(prep.noisy_val, spec.split_fraction,
                                    split_seed(spec.base_seed, p, spec.seeds[si]));
      prep.holdout_groups =
          derive_groups(prep.split.holdout, GroupLabels::kClean, num_domains);
    }
  }
  const GroupTable test_groups =
      derive_groups(data.test, GroupLabels::kClean, num_domains);

  std::optional<LinearModel> fitted_base;
  const LinearModel* base_model = nullptr;
  const bool needs_base = std::any_of(
      spec.methods.begin(), spec.methods.end(), [](const MethodSpec& m) {
        return m.kind == MethodKind::kSelf || m.kind == MethodKind::kKnnSelf;
      });
  if (needs_base) {
    if (data.base_model) {
      base_model = &*data.base_model;
    } else if (data.train) {
      TrainConfig config;
      config.l1_penalty = spec.base_model_c;
      config.penalty_convention = spec.inverse_c ? PenaltyConvention::kInverse
                                                 : PenaltyConvention::kDirect;
      config.max_iters = spec.max_iters;
      config.tol = spec.tol;
      fitted_base = train(data.train->with_labels(data.train->reference_labels()),
                          config);
      base_model = &*fitted_base;
    }
  }

  auto context_for = [&](const MethodSpec& m, double p, std::size_t hi,
                         std::size_t si) {
    FitContext ctx;
    ctx.base_model = base_model;
    ctx.seed = task_seed(spec.base_seed, method_name(m.kind), p, hi, si);
    ctx.inverse_c = spec.inverse_c;
    ctx.max_iters = spec.max_iters;
    ctx.tol = spec.tol;
    return ctx;
  };

  // Stage 1: holdout scores for cells with more than one point.
  struct CellPlan {
    std::size_t mi, pi;
    std::vector<HyperPoint> points;
  };
  std::vector<CellPlan> cells;
  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    for (std::size_t pi = 0; pi < num_noise; ++pi) {
      cells.push_back({mi, pi, spec.methods[mi].expand(spec.noise_levels[pi])});
    }
  }
  struct SelectTask {
    std::size_t cell, hi, si;
  };
  std::vector<SelectTask> select_tasks;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    if (cells[ci].points.size() < 2) continue;
    for (std::size_t hi = 0; hi < cells[ci].points.size(); ++hi) {
      for (std::size_t si = 0; si < num_seeds; ++si) {
        select_tasks.push_back({ci, hi, si});
      }
    }
  }
  std::vector<double> select_wga(select_tasks.size(), 0.0);
  std::vector<std::exception_ptr> select_error(select_tasks.size());
  parallel_for(select_tasks.size(), jobs, [&](std::size_t t) {
    const auto& task = select_tasks[t];
    const auto& cell = cells[task.cell];
    const MethodSpec& m = spec.methods[cell.mi];
    const double p = spec.noise_levels[cell.pi];
    const Prepared& prep = prepared[cell.pi * num_seeds + task.si];
    try {
      const FitOutcome fit = fit_method(m, cell.points[task.hi], prep.split.retrain,
                                        context_for(m, p, task.hi, task.si),
                                        num_domains);
      select_wga[t] =
          worst_group_accuracy(fit.model, prep.split.holdout, prep.holdout_groups)
              .wga;
    } catch (...) {
      select_error[t] = std::current_exception();
    }
  });

  SweepResult result;
  std::vector<std::optional<std::size_t>> chosen(cells.size());
  {
    std::size_t t = 0;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const auto& cell = cells[ci];
      const std::string name(method_name(spec.methods[cell.mi].kind));
      const double p = spec.noise_levels[cell.pi];
      if (cell.points.size() < 2) {
        result.selection.push_back({name, p, 0, cell.points[0], std::nullopt,
                                    num_seeds, true});
        chosen[ci] = 0;
        continue;
      }
      std::optional<double> best;
      const std::size_t first_row = result.selection.size();
      for (std::size_t hi = 0; hi < cell.points.size(); ++hi) {
        double sum = 0.0;
        std::size_t ok = 0;
        for (std::size_t si = 0; si < num_seeds; ++si, ++t) {
          if (select_error[t]) {
            auto [kind, message] = describe(select_error[t]);
            result.failures.push_back({name, p, "select", hi, spec.seeds[si],
                                       kind, message, false});
          } else {
            sum += select_wga[t];
            ++ok;
          }
        }
        SelectionRow row{name, p, hi, cell.points[hi], std::nullopt, ok, false};
        if (ok == num_seeds) {
          row.mean_holdout_wga = sum / static_cast<double>(num_seeds);
          if (!best || *row.mean_holdout_wga > *best) {
            best = row.mean_holdout_wga;
            chosen[ci] = hi;
          }
        }
        result.selection.push_back(std::move(row));
      }
      if (chosen[ci]) {
        result.selection[first_row + *chosen[ci]].selected = true;
      } else {
        result.failures.push_back({name, p, "cell", std::nullopt, std::nullopt,
                                   "selection",
                                   "every hyperparameter point failed on some seed",
                                   true});
      }
    }
  }

  // Stage 2: one test row per seed for the selected point.
  struct FinalTask {
    std::size_t cell, si;
  };
  std::vector<FinalTask> final_tasks;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    if (!chosen[ci]) continue;
    for (std::size_t si = 0; si < num_seeds; ++si) final_tasks.push_back({ci, si});
  }
  std::vector<ExperimentResult> final_rows(final_tasks.size());
  std::vector<std::exception_ptr> final_error(final_tasks.size());
  parallel_for(final_tasks.size(), jobs, [&](std::size_t t) {
    const auto& task = final_tasks[t];
    const auto& cell = cells[task.cell];
    const MethodSpec& m = spec.methods[cell.mi];
    const double p = spec.noise_levels[cell.pi];
    const std::size_t hi = *chosen[task.cell];
    const Prepared& prep = prepared[cell.pi * num_seeds + task.si];
    const EmbeddingDataset& fit_on = spec.final_fit == FinalFit::kFullValidation
                                         ? prep.noisy_val
                                         : prep.split.retrain;
    try {
      const FitOutcome fit = fit_method(m, cell.points[hi], fit_on,
                                        context_for(m, p, hi, task.si),
                                        num_domains);
      ExperimentResult r = worst_group_accuracy(fit.model, data.test, test_groups);
      r.method = std::string(method_name(m.kind));
      r.noise_level = p;
      r.seed = spec.seeds[task.si];
      final_rows[t] = std::move(r);
    } catch (...) {
      final_error[t] = std::current_exception();
    }
  });
  for (std::size_t t = 0; t < final_tasks.size(); ++t) {
    if (final_error[t]) {
      const auto& cell = cells[final_tasks[t].cell];
      auto [kind, message] = describe(final_error[t]);
      result.failures.push_back(
          {std::string(method_name(spec.methods[cell.mi].kind)),
           spec.noise_levels[cell.pi], "final", chosen[final_tasks[t].cell],
           spec.seeds[final_tasks[t].si], kind, message, true});
    } else {
      result.results.push_back(std::move(final_rows[t]));
    }
  }
  std::stable_sort(result.results.begin(), result.results.end(),
                   [](const ExperimentResult& a, const ExperimentResult& b) {
                     return std::tie(a.method, a.noise_level, a.seed) <
                            std::tie(b.method, b.noise_level, b.seed);
                   });
  return result;
}

SweepResult run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  return run_sweep(spec, load_sweep_data(spec), jobs);
}

std::string format_hyper(const HyperPoint& point) {
  std::string out;
  char buf[64];
  for (const auto& [key, value] : point) {
    std::snprintf(buf, sizeof(buf), "%g", value);
    if (!out.empty()) out += ';';
    out += key + "=" + buf;
  }
  return out;
}

void write_selection_csv(const std::vector<SelectionRow>& rows,
                         std::ostream& out) {
  out << "method,noise,hyper_index,params,mean_holdout_wga,seeds_ok,selected\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.noise_level) << ','
        << r.hyper_index << ',' << format_hyper(r.params) << ',';
    if (r.mean_holdout_wga) out << format_double(*r.mean_holdout_wga);
    out << ',' << r.seeds_ok << ',' << (r.selected ? 1 : 0) << '\n';
  }
}

void write_failures_csv(const std::vector<CellFailure>& failures,
                        std::ostream& out) {
  out << "method,noise,stage,hyper_index,seed,kind,fatal,message\n";
  for (const auto& f : failures) {
    out << f.method << ',' << format_double(f.noise_level) << ',' << f.stage
        << ',';
    if (f.hyper_index) out << *f.hyper_index;
    out << ',';
    if (f.seed) out << *f.seed;
    out << ',' << f.kind << ',' << (f.fatal ? 1 : 0) << ','
        << csv_quote(f.message) << '\n';
  }
}

}  // namespace wgaknn
