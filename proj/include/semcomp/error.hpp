/* Copyright 2026 The Semcomp Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace semcomp {

enum class ErrorKind {
  kInvalidInput,
  kInvalidState,
  kOutOfAlphabet,
  kTruncation,
  kDegenerateClustering,
  kInternalConsistency,
  kDesync,
  kFormat,
  kIo,
  kService,
  kProtocol,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidState: return "invalid-state";
    case ErrorKind::kOutOfAlphabet: return "out-of-alphabet";
    case ErrorKind::kTruncation: return "truncation";
    case ErrorKind::kDegenerateClustering: return "degenerate-clustering";
    case ErrorKind::kInternalConsistency: return "internal-consistency";
    case ErrorKind::kDesync: return "desync";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kService: return "service";
    case ErrorKind::kProtocol: return "protocol";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the kinds above so the
// CLI can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace semcomp
