// Copyright 2026 The elkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ELKIT_ERRORS_H_
#define ELKIT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace elkit {

// Error categories raised by the library. The CLI maps kIo to exit code 2
// and everything else to exit code 1.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidInput,
  kNotFound,
  kUnsupported,
  kInvalidBatch,
  kInvalidLabels,
  kNumeric,
  kIo,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kInvalidBatch: return "invalid-batch";
    case ErrorCode::kInvalidLabels: return "invalid-labels";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace elkit

#endif  // ELKIT_ERRORS_H_
