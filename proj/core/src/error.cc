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

#include "wgaknn/error.h"

namespace wgaknn {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat:
      return "format error";
    case ErrorKind::kValidation:
      return "validation error";
    case ErrorKind::kParameter:
      return "parameter error";
    case ErrorKind::kMissingAnnotation:
      return "missing-annotation error";
    case ErrorKind::kShape:
      return "shape error";
    case ErrorKind::kDegenerateData:
      return "degenerate-data error";
    case ErrorKind::kDivergence:
      return "divergence error";
    case ErrorKind::kDegenerateSelection:
      return "degenerate-selection error";
    case ErrorKind::kEvaluation:
      return "evaluation error";
    case ErrorKind::kAggregation:
      return "aggregation error";
    case ErrorKind::kConfig:
      return "config error";
    case ErrorKind::kIo:
      return "io error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wgaknn
