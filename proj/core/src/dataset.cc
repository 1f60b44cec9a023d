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

#include "wgaknn/dataset.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 32;
constexpr std::uint32_t kFlagDomains = 1u << 0;
constexpr std::uint32_t kFlagClean = 1u << 1;
constexpr std::int32_t kAbsent = -1;

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto bits = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bits.begin(), bits.end());
    }
    out_.insert(out_.end(), bits.begin(), bits.end());
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > in_.size()) {
      fail(ErrorKind::kFormat, "truncated EMB1 payload");
    }
    std::array<std::uint8_t, sizeof(T)> bits;
    std::memcpy(bits.data(), in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bits.begin(), bits.end());
    }
    return std::bit_cast<T>(bits);
  }

  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::optional<LabelVector> collapse_absent(LabelVector column,
                                           std::string_view what) {
  const auto absent = std::count(column.begin(), column.end(), kAbsent);
  if (absent == 0) return column;
  if (static_cast<std::size_t>(absent) == column.size()) return std::nullopt;
  fail(ErrorKind::kValidation,
       std::string(what) + " column is only partially annotated");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string_view split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kRetrain:
      return "retrain";
    case SplitTag::kHoldout:
      return "holdout";
    case SplitTag::kTest:
      return "test";
  }
  return "unknown";
}

void EmbeddingDataset::validate() const {
  const std::size_t n = size();
  if (n == 0) fail(ErrorKind::kValidation, "dataset has no rows");
  if (dim() == 0) fail(ErrorKind::kValidation, "dataset has zero dimensions");
  if (num_classes < 1) fail(ErrorKind::kValidation, "num_classes must be >= 1");
  if (!features.allFinite()) {
    fail(ErrorKind::kValidation, "features contain non-finite values");
  }
  auto check_labels = [&](const LabelVector& column, std::string_view what) {
    if (column.size() != n) {
      fail(ErrorKind::kValidation,
           std::string(what) + " length " + std::to_string(column.size()) +
               " != n = " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (column[i] < 0 || column[i] >= num_classes) {
        fail(ErrorKind::kValidation,
             std::string(what) + " at row " + std::to_string(i) +
                 " out of range: " + std::to_string(column[i]));
      }
    }
  };
  check_labels(labels, "labels");
  if (clean_labels) check_labels(*clean_labels, "clean_labels");
  if (domains) {
    if (domains->size() != n) {
      fail(ErrorKind::kValidation, "domains length does not match n");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if ((*domains)[i] < 0) {
        fail(ErrorKind::kValidation,
             "negative domain at row " + std::to_string(i));
      }
    }
  }
}

int EmbeddingDataset::num_domains() const {
  if (!domains || domains->empty()) return 0;
  return *std::max_element(domains->begin(), domains->end()) + 1;
}

const LabelVector& EmbeddingDataset::reference_labels() const {
  return clean_labels ? *clean_labels : labels;
}

EmbeddingDataset EmbeddingDataset::subset(
    std::span<const std::size_t> rows) const {
  EmbeddingDataset out;
  out.num_classes = num_classes;
  out.split_tag = split_tag;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = rows[r];
    if (src >= size()) fail(ErrorKind::kShape, "subset row out of range");
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(src));
    out.labels.push_back(labels[src]);
  }
  auto pick = [&](const std::optional<LabelVector>& column) {
    if (!column) return std::optional<LabelVector>();
    LabelVector picked;
    picked.reserve(rows.size());
    for (auto src : rows) picked.push_back((*column)[src]);
    return std::optional<LabelVector>(std::move(picked));
  };
  out.clean_labels = pick(clean_labels);
  out.domains = pick(domains);
  return out;
}

EmbeddingDataset EmbeddingDataset::with_labels(LabelVector new_labels) const {
  if (new_labels.size() != size()) {
    fail(ErrorKind::kShape, "replacement labels do not match row count");
  }
  EmbeddingDataset out = *this;
  out.labels = std::move(new_labels);
  return out;
}

bool EmbeddingDataset::operator==(const EmbeddingDataset& other) const {
  return num_classes == other.num_classes && split_tag == other.split_tag &&
         features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() &&
         features == other.features && labels == other.labels &&
         clean_labels == other.clean_labels && domains == other.domains;
}

std::vector<std::uint8_t> encode_emb1(const EmbeddingDataset& dataset) {
  dataset.validate();
  const std::size_t n = dataset.size();
  const std::size_t d = dataset.dim();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(kHeaderBytes + 4 * n * (d + 3));
  ByteWriter out(bytes);
  for (char c : kMagic) out.put(static_cast<std::uint8_t>(c));
  out.put(kVersion);
  out.put(static_cast<std::uint64_t>(n));
  out.put(static_cast<std::uint64_t>(d));
  out.put(static_cast<std::uint32_t>(dataset.num_classes));
  std::uint32_t flags = 0;
  if (dataset.domains) flags |= kFlagDomains;
  if (dataset.clean_labels) flags |= kFlagClean;
  out.put(flags);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.put(dataset.features(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j)));
    }
  }
  for (auto v : dataset.labels) out.put(v);
  if (dataset.domains) {
    for (auto v : *dataset.domains) out.put(v);
  }
  if (dataset.clean_labels) {
    for (auto v : *dataset.clean_labels) out.put(v);
  }
  return bytes;
}

EmbeddingDataset decode_emb1(std::span<const std::uint8_t> bytes,
                             SplitTag tag) {
  if (bytes.size() < kHeaderBytes ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::kFormat, "missing EMB1 magic");
  }
  ByteReader in(bytes.subspan(sizeof(kMagic)));
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) {
    fail(ErrorKind::kFormat, "unsupported EMB1 version " +
                                 std::to_string(version));
  }
  const auto n = in.get<std::uint64_t>();
  const auto d = in.get<std::uint64_t>();
  const auto num_classes = in.get<std::uint32_t>();
  const auto flags = in.get<std::uint32_t>();
  if ((flags & ~(kFlagDomains | kFlagClean)) != 0) {
    fail(ErrorKind::kFormat, "unknown EMB1 flag bits");
  }
  if (num_classes == 0 ||
      num_classes > static_cast<std::uint32_t>(
                        std::numeric_limits<std::int32_t>::max())) {
    fail(ErrorKind::kValidation, "num_classes out of range");
  }
  // Every size computation below must stay within u64 and match the payload.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (n == 0 || d == 0) fail(ErrorKind::kValidation, "empty EMB1 dataset");
  if (d > kMax / n || n * d > kMax / 4) {
    fail(ErrorKind::kValidation, "n*d overflows");
  }
  const std::uint64_t columns = 1 + ((flags & kFlagDomains) ? 1 : 0) +
                                ((flags & kFlagClean) ? 1 : 0);
  const std::uint64_t expected = 4 * n * d + 4 * n * columns;
  if (expected != in.remaining()) {
    fail(ErrorKind::kFormat, "EMB1 payload size " +
                                 std::to_string(in.remaining()) +
                                 " does not match header (" +
                                 std::to_string(expected) + ")");
  }

  EmbeddingDataset out;
  out.num_classes = static_cast<int>(num_classes);
  out.split_tag = tag;
  out.features.resize(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      out.features(static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(j)) = in.get<float>();
    }
  }
  auto read_column = [&] {
    LabelVector column(n);
    for (auto& v : column) v = in.get<std::int32_t>();
    return column;
  };
  out.labels = read_column();
  if (flags & kFlagDomains) out.domains = collapse_absent(read_column(), "domain");
  if (flags & kFlagClean) {
    out.clean_labels = collapse_absent(read_column(), "clean_label");
  }
  out.validate();
  return out;
}

EmbeddingDataset load_embeddings(const std::filesystem::path& path,
                                 SplitTag tag) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return decode_emb1(bytes, tag);
}

void save_embeddings(const EmbeddingDataset& dataset,
                     const std::filesystem::path& path) {
  const auto bytes = encode_emb1(dataset);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::kIo, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) fail(ErrorKind::kIo, "short write to " + path.string());
}

EmbeddingDataset load_embeddings_csv(const std::filesystem::path& path,
                                     int num_classes, SplitTag tag) {
  std::ifstream file(path);
  if (!file) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(file, line)) fail(ErrorKind::kFormat, "empty CSV");
  const auto header = split_csv_line(line);
  std::size_t d = 0;
  while (d < header.size() && header[d] == "f" + std::to_string(d)) ++d;
  if (d == 0 || d >= header.size() || header[d] != "label") {
    fail(ErrorKind::kFormat, "CSV header must be f0..f{d-1},label[,...]");
  }
  int domain_col = -1;
  int clean_col = -1;
  for (std::size_t c = d + 1; c < header.size(); ++c) {
    if (header[c] == "domain" && domain_col < 0 && clean_col < 0) {
      domain_col = static_cast<int>(c);
    } else if (header[c] == "clean_label" && clean_col < 0) {
      clean_col = static_cast<int>(c);
    } else {
      fail(ErrorKind::kFormat, "unexpected CSV column '" + header[c] + "'");
    }
  }

  std::vector<float> values;
  LabelVector labels, domains, clean;
  std::size_t row = 0;
  while (std::getline(file, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::kFormat, "CSV row " + std::to_string(row) +
                                   " has wrong number of cells");
    }
    try {
      for (std::size_t j = 0; j < d; ++j) values.push_back(std::stof(cells[j]));
      labels.push_back(std::stoi(cells[d]));
      if (domain_col >= 0) domains.push_back(std::stoi(cells[domain_col]));
      if (clean_col >= 0) clean.push_back(std::stoi(cells[clean_col]));
    } catch (const std::logic_error&) {
      fail(ErrorKind::kFormat,
           "unparseable value in CSV row " + std::to_string(row));
    }
    ++row;
  }

  EmbeddingDataset out;
  out.split_tag = tag;
  out.features = Eigen::Map<FeatureMatrix>(values.data(),
                                           static_cast<Eigen::Index>(row),
                                           static_cast<Eigen::Index>(d));
  out.labels = std::move(labels);
  if (domain_col >= 0) out.domains = collapse_absent(std::move(domains), "domain");
  if (clean_col >= 0) {
    out.clean_labels = collapse_absent(std::move(clean), "clean_label");
  }
  if (num_classes > 0) {
    out.num_classes = num_classes;
  } else {
    int top = 0;
    for (auto v : out.labels) top = std::max(top, v);
    if (out.clean_labels) {
      for (auto v : *out.clean_labels) top = std::max(top, v);
    }
    out.num_classes = top + 1;
  }
  out.validate();
  return out;
}

void save_embeddings_csv(const EmbeddingDataset& dataset,
                         const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream file(path, std::ios::trunc);
  if (!file) fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::size_t d = dataset.dim();
  for (std::size_t j = 0; j < d; ++j) file << 'f' << j << ',';
  file << "label";
  if (dataset.domains) file << ",domain";
  if (dataset.clean_labels) file << ",clean_label";
  file << '\n';
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      // 9 significant digits round-trips every float exactly.
      std::snprintf(buf, sizeof(buf), "%.9g",
                    static_cast<double>(dataset.features(
                        static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(j))));
      file << buf << ',';
    }
    file << dataset.labels[i];
    if (dataset.domains) file << ',' << (*dataset.domains)[i];
    if (dataset.clean_labels) file << ',' << (*dataset.clean_labels)[i];
    file << '\n';
  }
  if (!file) fail(ErrorKind::kIo, "short write to " + path.string());
}

EmbeddingDataset load_any(const std::filesystem::path& path, SplitTag tag) {
  if (path.extension() == ".csv") return load_embeddings_csv(path, 0, tag);
  return load_embeddings(path, tag);
}

void save_any(const EmbeddingDataset& dataset,
              const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    save_embeddings_csv(dataset, path);
  } else {
    save_embeddings(dataset, path);
  }
}

}  // namespace wgaknn
