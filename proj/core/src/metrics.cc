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

#include "wgaknn/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include "wgaknn/error.h"

namespace wgaknn {
namespace {

bool result_less(const ExperimentResult& a, const ExperimentResult& b) {
  return std::tie(a.method, a.noise_level, a.seed) <
         std::tie(b.method, b.noise_level, b.seed);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

ExperimentResult evaluate_predictions(std::span<const std::int32_t> predicted,
                                      std::span<const std::int32_t> clean,
                                      const GroupTable& groups) {
  if (predicted.size() != clean.size() ||
      predicted.size() != groups.num_rows()) {
    fail(ErrorKind::kShape, "predictions, labels and groups differ in length");
  }
  for (int g = 0; g < groups.num_groups(); ++g) {
    if (groups.sizes[static_cast<std::size_t>(g)] == 0) {
      const auto [cls, dom] = groups.class_and_domain(g);
      fail(ErrorKind::kEvaluation,
           "group " + std::to_string(g) + " (class " + std::to_string(cls) +
               ", domain " + std::to_string(dom) + ") has no test rows");
    }
  }
  std::vector<std::size_t> correct(groups.sizes.size(), 0);
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == clean[i]) {
      ++correct[static_cast<std::size_t>(groups.group_of_row[i])];
      ++total_correct;
    }
  }
  ExperimentResult result;
  result.group_accuracies.resize(groups.sizes.size());
  result.wga = 1.0;
  for (std::size_t g = 0; g < groups.sizes.size(); ++g) {
    result.group_accuracies[g] =
        static_cast<double>(correct[g]) / static_cast<double>(groups.sizes[g]);
    result.wga = std::min(result.wga, result.group_accuracies[g]);
  }
  result.overall_accuracy =
      predicted.empty() ? 0.0
                        : static_cast<double>(total_correct) /
                              static_cast<double>(predicted.size());
  return result;
}

ExperimentResult worst_group_accuracy(const LinearModel& model,
                                      const EmbeddingDataset& test,
                                      const GroupTable& groups) {
  if (!test.clean_labels) {
    fail(ErrorKind::kMissingAnnotation, "test split has no clean labels");
  }
  const LabelVector predicted = predict(model, test.features);
  return evaluate_predictions(predicted, *test.clean_labels, groups);
}

ExperimentResult worst_group_accuracy(const LinearModel& model,
                                      const EmbeddingDataset& test) {
  return worst_group_accuracy(model, test,
                              derive_groups(test, GroupLabels::kClean));
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::kAggregation, "cannot aggregate 0 values");
  Summary s;
  s.count = values.size();
  // Shifted by the first value, so constant input has std exactly 0.
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double offset = sum / static_cast<double>(values.size());
  s.mean = shift + offset;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - shift - offset) * (v - shift - offset);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<SummaryRow> aggregate(std::span<const ExperimentResult> results) {
  if (results.empty()) fail(ErrorKind::kAggregation, "no results to aggregate");
  // Sorting values inside each cell makes the sums independent of input order.
  std::map<std::pair<std::string, double>,
           std::pair<std::vector<double>, std::vector<double>>>
      cells;
  for (const auto& r : results) {
    auto& cell = cells[{r.method, r.noise_level}];
    cell.first.push_back(r.wga);
    cell.second.push_back(r.overall_accuracy);
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, values] : cells) {
    std::sort(values.first.begin(), values.first.end());
    std::sort(values.second.begin(), values.second.end());
    rows.push_back({key.first, key.second, summarize(values.first),
                    summarize(values.second)});
  }
  return rows;
}

void write_results_csv(std::span<const ExperimentResult> results,
                       std::ostream& out) {
  std::vector<ExperimentResult> sorted(results.begin(), results.end());
  std::stable_sort(sorted.begin(), sorted.end(), result_less);
  std::size_t width = 0;
  for (const auto& r : sorted) width = std::max(width, r.group_accuracies.size());
  out << "method,noise,seed,wga,overall";
  for (std::size_t g = 0; g < width; ++g) out << ",acc_g" << g;
  out << '\n';
  for (const auto& r : sorted) {
    out << r.method << ',' << format_number(r.noise_level) << ',' << r.seed
        << ',' << format_number(r.wga) << ','
        << format_number(r.overall_accuracy);
    for (std::size_t g = 0; g < width; ++g) {
      out << ',';
      if (g < r.group_accuracies.size()) {
        out << format_number(r.group_accuracies[g]);
      }
    }
    out << '\n';
  }
}

std::vector<ExperimentResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,noise,seed,wga,overall", 0) != 0) {
    fail(ErrorKind::kFormat, "results CSV header not recognized");
  }
  std::vector<ExperimentResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() < 5) {
      fail(ErrorKind::kFormat,
           "results CSV line " + std::to_string(line_no) + " is too short");
    }
    ExperimentResult r;
    try {
      r.method = cells[0];
      r.noise_level = std::stod(cells[1]);
      r.seed = std::stoull(cells[2]);
      r.wga = std::stod(cells[3]);
      r.overall_accuracy = std::stod(cells[4]);
      for (std::size_t i = 5; i < cells.size(); ++i) {
        if (cells[i].empty()) break;
        r.group_accuracies.push_back(std::stod(cells[i]));
      }
    } catch (const std::logic_error&) {
      fail(ErrorKind::kFormat,
           "results CSV line " + std::to_string(line_no) + " is malformed");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wgaknn
