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

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace edgedem {

// Named substreams so that unrelated consumers never share a generator.
enum class Stream : std::uint64_t {
  kTopology = 1,
  kProfiles = 2,
  kData = 3,
  kPartition = 4,
  kModelInit = 5,
  kLocalTrain = 6,
  kRandomBaseline = 7,
};

// Seeded generator with platform-independent distributions.
//
// std::normal_distribution and friends are implementation-defined, so the
// conversions from raw 64-bit draws are done here to keep outputs
// byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  static Rng derive(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    return Rng(mix(seed ^ mix(static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL + index)));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi);

  double normal(double mean = 0.0, double stddev = 1.0);

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace edgedem
