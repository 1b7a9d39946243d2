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

#include <cmath>
#include <numbers>

#include "edgedem/error.hpp"
#include "edgedem/rng.hpp"

namespace edgedem {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyNetwork: return "EmptyNetwork";
    case ErrorCode::kEmptyAssignment: return "EmptyAssignment";
    case ErrorCode::kInvalidAccuracy: return "InvalidAccuracy";
    case ErrorCode::kZeroRate: return "ZeroRate";
    case ErrorCode::kEmptySbs: return "EmptySbs";
    case ErrorCode::kUnassignedUe: return "UnassignedUe";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMissingAncestor: return "MissingAncestor";
    case ErrorCode::kDivergence: return "DivergenceDetected";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

double Rng::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

double Rng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

}  // namespace edgedem
