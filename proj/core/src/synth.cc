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

#include "wgaknn/synth.h"

#include <cmath>
#include <fstream>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "json.hpp"

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

constexpr std::uint64_t kTrainStream = 0x74726169'6e000001ULL;
constexpr std::uint64_t kValStream = 0x76616c00'00000002ULL;
constexpr std::uint64_t kTestStream = 0x74657374'00000003ULL;
constexpr std::uint64_t kBasisStream = 0x62617369'73000004ULL;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Satellite {
  Eigen::VectorXd center;  // relative offset from the group sub-center
};

struct Geometry {
  std::vector<Eigen::VectorXd> sub_centers;           // by group id
  std::vector<std::vector<Eigen::VectorXd>> satellites;  // by group id
};

Geometry build_geometry(const SynthConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.d);
  std::mt19937_64 rng(mix(config.seed ^ kBasisStream));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd gauss(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gauss(i, j) = normal(rng);
  }
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

  const int nc = config.num_classes;
  const int nd = config.num_domains;
  const double s = config.within_std;
  std::vector<Eigen::VectorXd> class_means;
  for (int c = 0; c < nc; ++c) {
    class_means.push_back(config.class_sep / std::sqrt(2.0) * s * q.col(c));
  }
  Geometry geo;
  for (int c = 0; c < nc; ++c) {
    for (int dom = 0; dom < nd; ++dom) {
      Eigen::VectorXd center = class_means[static_cast<std::size_t>(c)];
      if (nd > 1) {
        center += config.domain_shift / std::sqrt(2.0) * s * q.col(nc + dom);
      }
      geo.sub_centers.push_back(center);
    }
  }
  geo.satellites.resize(geo.sub_centers.size());
  const int free_dirs = static_cast<int>(d) - nc - (nd > 1 ? nd : 0);
  const int first_free = static_cast<int>(d) - free_dirs;
  std::uniform_int_distribution<int> pick_dir(0, std::max(0, free_dirs - 1));
  std::uniform_int_distribution<int> pick_class(0, std::max(0, nc - 2));
  std::bernoulli_distribution coin(0.5);
  for (int c = 0; c < nc; ++c) {
    for (int dom = 0; dom < nd; ++dom) {
      const std::size_t g = static_cast<std::size_t>(c * nd + dom);
      for (int k = 1; k < config.subclusters_per_class; ++k) {
        int other = pick_class(rng);
        if (other >= c) ++other;
        const double sign = coin(rng) ? 1.0 : -1.0;
        const Eigen::VectorXd dir = sign * q.col(first_free + pick_dir(rng));
        const Eigen::VectorXd target =
            class_means[static_cast<std::size_t>(other)] +
            config.subcluster_spacing * s * dir;
        geo.satellites[g].push_back(target - class_means[static_cast<std::size_t>(c)]);
      }
    }
  }
  return geo;
}

EmbeddingDataset sample_split(const SynthConfig& config, const Geometry& geo,
                              std::size_t n, double correlation, bool balanced,
                              std::uint64_t stream, SplitTag tag) {
  const std::vector<std::size_t> sizes =
      group_sizes(config, n, correlation, balanced);
  const auto d = static_cast<Eigen::Index>(config.d);
  std::mt19937_64 rng(mix(config.seed ^ stream));
  std::normal_distribution<double> normal;

  EmbeddingDataset ds;
  ds.num_classes = config.num_classes;
  ds.split_tag = tag;
  ds.features.resize(static_cast<Eigen::Index>(n), d);
  ds.labels.reserve(n);
  LabelVector domains;
  domains.reserve(n);
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const int cls = static_cast<int>(g) / config.num_domains;
    const int dom = static_cast<int>(g) % config.num_domains;
    const auto& sats = geo.satellites[g];
    const auto per_sat = static_cast<std::size_t>(
        std::llround(config.satellite_fraction * static_cast<double>(sizes[g])));
    const std::size_t in_sats = std::min(sizes[g], per_sat * sats.size());
    for (std::size_t i = 0; i < sizes[g]; ++i, ++row) {
      Eigen::VectorXd center = geo.sub_centers[g];
      if (i >= sizes[g] - in_sats && per_sat > 0) {
        center += sats[(i - (sizes[g] - in_sats)) / per_sat];
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        ds.features(row, j) =
            static_cast<float>(center(j) + config.within_std * normal(rng));
      }
      ds.labels.push_back(cls);
      domains.push_back(dom);
    }
  }
  ds.clean_labels = ds.labels;
  ds.domains = std::move(domains);
  return ds;
}

}  // namespace

void SynthConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kParameter, msg); };
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (num_domains < 1) bad("num_domains must be >= 1");
  if (sizes.train < 1 || sizes.val < 1 || sizes.test < 1) {
    bad("every split needs at least one row");
  }
  for (double corr : {train_correlation, val_correlation}) {
    if (!(corr >= 0.5 && corr < 1.0)) bad("correlation must lie in [0.5, 1)");
  }
  if (!(class_sep > 0.0) || !std::isfinite(class_sep)) bad("class_sep must be > 0");
  if (!(within_std > 0.0) || !std::isfinite(within_std)) bad("within_std must be > 0");
  if (!(domain_shift >= 0.0) || !std::isfinite(domain_shift)) {
    bad("domain_shift must be >= 0");
  }
  if (num_domains > 1 && !(domain_shift < class_sep)) {
    bad("domain_shift must be smaller than class_sep");
  }
  if (subclusters_per_class < 1) bad("subclusters_per_class must be >= 1");
  if (subclusters_per_class > 1) {
    if (!(subcluster_spacing > 0.0)) bad("subcluster_spacing must be > 0");
    if (!(satellite_fraction > 0.0) ||
        !(satellite_fraction * (subclusters_per_class - 1) < 1.0)) {
      bad("satellites must leave a non-empty core");
    }
  }
  const std::size_t needed = static_cast<std::size_t>(num_classes) +
                             (num_domains > 1 ? num_domains : 0) +
                             (subclusters_per_class > 1 ? 1 : 0);
  if (d < needed) {
    bad("d must be at least " + std::to_string(needed) + " for this layout");
  }
}

std::vector<std::size_t> group_sizes(const SynthConfig& config, std::size_t n,
                                     double correlation, bool balanced) {
  const auto nc = static_cast<std::size_t>(config.num_classes);
  const auto nd = static_cast<std::size_t>(config.num_domains);
  std::vector<std::size_t> sizes(nc * nd, 0);
  if (balanced) {
    for (std::size_t g = 0; g < sizes.size(); ++g) {
      sizes[g] = n / sizes.size() + (g < n % sizes.size() ? 1 : 0);
    }
    return sizes;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t m = n / nc + (c < n % nc ? 1 : 0);
    if (nd == 1) {
      sizes[c] = m;
      continue;
    }
    const std::size_t aligned_dom = c % nd;
    const auto aligned = static_cast<std::size_t>(
        std::llround(correlation * static_cast<double>(m)));
    const std::size_t rest = m - aligned;
    sizes[c * nd + aligned_dom] = aligned;
    std::size_t slot = 0;
    for (std::size_t dom = 0; dom < nd; ++dom) {
      if (dom == aligned_dom) continue;
      sizes[c * nd + dom] = rest / (nd - 1) + (slot < rest % (nd - 1) ? 1 : 0);
      ++slot;
    }
  }
  return sizes;
}

SynthSplits generate(const SynthConfig& config) {
  config.validate();
  const Geometry geo = build_geometry(config);
  SynthSplits out;
  out.train = sample_split(config, geo, config.sizes.train,
                           config.train_correlation, false, kTrainStream,
                           SplitTag::kTrain);
  out.val = sample_split(config, geo, config.sizes.val, config.val_correlation,
                         false, kValStream, SplitTag::kRetrain);
  out.test = sample_split(config, geo, config.sizes.test, 0.5, true,
                          kTestStream, SplitTag::kTest);
  return out;
}

std::string synth_manifest_json(const SynthConfig& config,
                                const SynthSplits& splits,
                                const std::filesystem::path& train_file,
                                const std::filesystem::path& val_file,
                                const std::filesystem::path& test_file) {
  nlohmann::ordered_json j;
  j["generator"] = "wgaknn-synth";
  j["config"] = {
      {"num_classes", config.num_classes},
      {"num_domains", config.num_domains},
      {"d", config.d},
      {"sizes",
       {{"train", config.sizes.train},
        {"val", config.sizes.val},
        {"test", config.sizes.test}}},
      {"train_correlation", config.train_correlation},
      {"val_correlation", config.val_correlation},
      {"class_sep", config.class_sep},
      {"domain_shift", config.domain_shift},
      {"subclusters_per_class", config.subclusters_per_class},
      {"subcluster_spacing", config.subcluster_spacing},
      {"satellite_fraction", config.satellite_fraction},
      {"within_std", config.within_std},
      {"seed", config.seed},
  };
  auto entry = [](const EmbeddingDataset& ds, const std::filesystem::path& f) {
    return nlohmann::ordered_json{
        {"file", f.string()}, {"n", ds.size()}, {"d", ds.dim()}};
  };
  j["splits"] = {{"train", entry(splits.train, train_file)},
                 {"val", entry(splits.val, val_file)},
                 {"test", entry(splits.test, test_file)}};
  return j.dump(2);
}

void write_synth(const SynthConfig& config, const SynthSplits& splits,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string());
  save_embeddings(splits.train, dir / "train.emb");
  save_embeddings(splits.val, dir / "val.emb");
  save_embeddings(splits.test, dir / "test.emb");
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  out << synth_manifest_json(config, splits, "train.emb", "val.emb", "test.emb")
      << '\n';
}

double noise_ratio(double p) {
  if (!(p >= 0.0 && p < 0.5)) {
    fail(ErrorKind::kParameter, "noise level must lie in [0, 0.5)");
  }
  return p / (1.0 - 2.0 * p);
}

std::size_t recommend_k(const KBoundParams& params) {
  const double ratio = noise_ratio(params.p);
  if (!(params.bayes_risk >= 0.0 && params.bayes_risk < 0.5)) {
    fail(ErrorKind::kParameter, "bayes_risk must lie in [0, 0.5)");
  }
  if (!(params.scale_constant > 0.0)) {
    fail(ErrorKind::kParameter, "scale_constant must be > 0");
  }
  const double term = params.bayes_risk + ratio;
  // The slack keeps exact products such as 72 * (1/3)^2 = 8 from rounding up.
  const auto raw = static_cast<std::size_t>(
      std::ceil(params.scale_constant * term * term - 1e-9));
  std::size_t k = std::max(params.k_min, raw);
  if (k % 2 == 0) ++k;
  return k;
}

}  // namespace wgaknn
