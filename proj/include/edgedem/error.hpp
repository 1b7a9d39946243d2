/*
 * Copyright 2026 The edgedem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace edgedem {

// Numeric values are part of the C ABI (see edgedem.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kEmptyNetwork = 2,
  kEmptyAssignment = 3,
  kInvalidAccuracy = 4,
  kZeroRate = 5,
  kEmptySbs = 6,
  kUnassignedUe = 7,
  kNonConvergence = 8,
  kTooLarge = 9,
  kEmptyDataset = 10,
  kMissingAncestor = 11,
  kDivergence = 12,
  kEmptyGroup = 13,
  kInsufficientSamples = 14,
  kBadMagic = 15,
  kCountMismatch = 16,
  kTruncatedFile = 17,
  kIoError = 18,
  kInvalidConfig = 19,
  kInternal = 20,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edgedem
