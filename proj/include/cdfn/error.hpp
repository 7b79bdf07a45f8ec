// Copyright 2026 The cdfn Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace cdfn {

/// Failure categories raised by the library. The numeric values are part of
/// the C API (see cdfn.h) and must not be reordered.
enum class ErrorCode : int {
  kIndex = 1,
  kNonFiniteValue = 2,
  kFormat = 3,
  kInvalidPatchSize = 4,
  kDim = 5,
  kInvalidK = 6,
  kInvalidWindow = 7,
  kInvalidGrouping = 8,
  kDegenerateLabels = 9,
  kAlignment = 10,
  kContract = 11,
  kIo = 12,
  kConfig = 13,
  kInvalidArgument = 14,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cdfn
