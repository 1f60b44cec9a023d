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

#include "wgaknn/report.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <vector>

#include "wgaknn/error.h"
#include "wgaknn/methods.h"

namespace wgaknn {
namespace {

constexpr std::string_view kCanonicalOrder[] = {
    "erm", "guw", "gds", "rad", "self", "knn-rad", "knn-self"};

std::size_t method_rank(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kCanonicalOrder); ++i) {
    if (kCanonicalOrder[i] == name) return i;
  }
  return std::size(kCanonicalOrder);
}

bool annotation_free(const std::string& name) {
  return name != "guw" && name != "gds";
}

std::string noise_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return buf;
}

std::string percent_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", p * 100.0);
  return buf;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  fail(ErrorKind::kParameter, "unknown report format '" + std::string(name) + "'");
}

std::string format_cell(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", mean * 100.0, std * 100.0);
  return buf;
}

std::string render_report(std::span<const SummaryRow> rows,
                          ReportFormat format) {
  if (rows.empty()) fail(ErrorKind::kAggregation, "nothing to report");
  std::vector<std::string> methods;
  std::vector<double> noises;
  std::map<std::pair<std::string, double>, const SummaryRow*> cells;
  for (const auto& row : rows) {
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
      methods.push_back(row.method);
    }
    if (std::find(noises.begin(), noises.end(), row.noise_level) == noises.end()) {
      noises.push_back(row.noise_level);
    }
    cells[{row.method, row.noise_level}] = &row;
  }
  std::stable_sort(methods.begin(), methods.end(),
                   [](const std::string& a, const std::string& b) {
                     const auto ra = method_rank(a);
                     const auto rb = method_rank(b);
                     return ra != rb ? ra < rb : a < b;
                   });
  std::sort(noises.begin(), noises.end());
  auto find = [&](const std::string& m, double p) -> const SummaryRow* {
    auto it = cells.find({m, p});
    return it == cells.end() ? nullptr : it->second;
  };

  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "method";
    for (double p : noises) out += "," + noise_label(p);
    out += '\n';
    for (const auto& m : methods) {
      out += m;
      for (double p : noises) {
        const SummaryRow* row = find(m, p);
        out += ",";
        if (row) out += format_cell(row->wga.mean, row->wga.std);
      }
      out += '\n';
    }
    return out;
  }

  // Best annotation-free cell per column.
  std::vector<const SummaryRow*> best(noises.size(), nullptr);
  for (std::size_t j = 0; j < noises.size(); ++j) {
    for (const auto& m : methods) {
      const SummaryRow* row = find(m, noises[j]);
      if (!row || !annotation_free(m)) continue;
      if (!best[j] || row->wga.mean > best[j]->wga.mean) best[j] = row;
    }
  }
  out = "| Method |";
  for (double p : noises) out += " " + percent_label(p) + " |";
  out += "\n|---|";
  for (std::size_t j = 0; j < noises.size(); ++j) out += "---|";
  out += '\n';
  for (const auto& m : methods) {
    out += "| " + m + " |";
    for (std::size_t j = 0; j < noises.size(); ++j) {
      const SummaryRow* row = find(m, noises[j]);
      if (!row) {
        out += " - |";
        continue;
      }
      std::string cell = format_cell(row->wga.mean, row->wga.std);
      const bool bold = annotation_free(m) && best[j] &&
                        row->wga.mean >= best[j]->wga.mean - best[j]->wga.std;
      if (bold) {
        const auto space = cell.find(' ');
        cell = "**" + cell.substr(0, space) + "**" + cell.substr(space);
      }
      out += " " + cell + " |";
    }
    out += '\n';
  }
  return out;
}

std::string render_report(std::span<const ExperimentResult> results,
                          ReportFormat format) {
  const std::vector<SummaryRow> rows = aggregate(results);
  return render_report(rows, format);
}

}  // namespace wgaknn
