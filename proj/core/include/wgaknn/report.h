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

// Method-by-noise tables of worst-group accuracy, "mean (std)" in percent.

#ifndef WGAKNN_REPORT_H_
#define WGAKNN_REPORT_H_

#include <span>
#include <string>
#include <string_view>

#include "wgaknn/metrics.h"

namespace wgaknn {

enum class ReportFormat { kCsv, kMarkdown };

ReportFormat parse_report_format(std::string_view name);

// "85.00 (0.00)" from fractions 0.85 and 0.0.
std::string format_cell(double mean, double std);

// One row per method, one column per noise level. Markdown bolds, within each
// column, the best annotation-free method and every annotation-free method
// whose mean is within the best cell's std of it. guw and gds use domain
// annotations and are never bolded.
std::string render_report(std::span<const SummaryRow> rows, ReportFormat format);
std::string render_report(std::span<const ExperimentResult> results,
                          ReportFormat format);

}  // namespace wgaknn

#endif  // WGAKNN_REPORT_H_
