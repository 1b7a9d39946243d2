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

#include <cmath>

namespace edgedem {

// Dimension-tagged scalar. Only the conversions spelled out below exist, so
// mixing bits with bytes or cycles with seconds fails to compile.
template <class Tag>
struct Quantity {
  double value = 0.0;

  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}

  constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
  constexpr Quantity operator*(double k) const { return Quantity(value * k); }
  constexpr Quantity operator/(double k) const { return Quantity(value / k); }
  constexpr double operator/(Quantity o) const { return value / o.value; }
  constexpr auto operator<=>(const Quantity&) const = default;
};

struct SecondsTag {};
struct BitsTag {};
struct BytesTag {};
struct HertzTag {};
struct BitsPerSecondTag {};
struct CyclesTag {};

using Seconds = Quantity<SecondsTag>;
using Bits = Quantity<BitsTag>;
using Bytes = Quantity<BytesTag>;
using Hertz = Quantity<HertzTag>;
using BitsPerSecond = Quantity<BitsPerSecondTag>;
using Cycles = Quantity<CyclesTag>;

constexpr Bits to_bits(Bytes b) { return Bits(8.0 * b.value); }
// Model sizes are quoted in decimal kilobytes.
constexpr Bytes kilobytes(double kb) { return Bytes(1000.0 * kb); }
constexpr Hertz gigahertz(double ghz) { return Hertz(1e9 * ghz); }

constexpr Seconds operator/(Bits b, BitsPerSecond r) { return Seconds(b.value / r.value); }
constexpr Seconds operator/(Cycles c, Hertz f) { return Seconds(c.value / f.value); }
constexpr BitsPerSecond operator*(Hertz bw, double spectral_efficiency) {
  return BitsPerSecond(bw.value * spectral_efficiency);
}

constexpr double to_milliseconds(Seconds s) { return 1e3 * s.value; }

// Power conversions. dBm is referenced to 1 mW.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watts_to_dbm(double watts) { return linear_to_db(watts / 1e-3); }

}  // namespace edgedem
