// Copyright 2026 The pixreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIXREG_ERRORS_H_
#define PIXREG_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pixreg {

// Every failure raised by the library carries one of these categories so
// callers (and the CLI's exit-code policy) can branch without parsing text.
enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNotOnTape,
  kNumeric,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kCountMismatch,
  kFormat,
  kConfig,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace pixreg

#endif  // PIXREG_ERRORS_H_
