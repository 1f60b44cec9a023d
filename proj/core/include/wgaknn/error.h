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

#ifndef WGAKNN_ERROR_H_
#define WGAKNN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace wgaknn {

// Failure categories. Every exception thrown by the library is an `Error`
// carrying one of these, so callers (and tests) can branch on the category
// without parsing messages.
enum class ErrorKind {
  kFormat,
  kValidation,
  kParameter,
  kMissingAnnotation,
  kShape,
  kDegenerateData,
  kDivergence,
  kDegenerateSelection,
  kEvaluation,
  kAggregation,
  kConfig,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace wgaknn

#endif  // WGAKNN_ERROR_H_
