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
#include <span>
#include <vector>

#include "edgedem/matrix.hpp"
#include "json.hpp"

namespace edgedem::radio {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

// Radio parameters of the two-tier network. The MBS sits at the origin.
struct RadioConfig {
  // Occupied bandwidth of a 3 MHz channel: 15 RBs of 180 kHz.
  double bandwidth_total_hz = 2.7e6;
  int num_subbands = 15;
  double rb_bandwidth_hz = 180e3;
  // Sub-bands per SBS (zeta_s); empty means every SBS reuses all sub-bands.
  std::vector<int> subbands_per_sbs;
  double tx_power_dbm = 23.0;
  double noise_psd_dbm_hz = -174.0;
  double shadowing_std_db = 3.0;
  double pathloss_a_db = 128.1;
  double pathloss_b_db = 37.6;
  double network_radius_m = 100.0;
  double ue_min_dist_m = 2.0;

  // Throws InvalidConfig when an invariant is broken.
  void validate(int num_sbs) const;

  int subbands_of(int sbs) const;
  // M_RB = S x Delta.
  int total_rbs(int num_sbs) const { return num_sbs * num_subbands; }
  // Thermal noise integrated over one RB, in watts.
  double noise_power_w() const;
};

// 128.1 + 37.6 log10(d_km) with the configured coefficients.
double path_loss_db(const RadioConfig& config, double distance_m);

struct NetworkInstance {
  std::vector<Point> sbs_positions;
  std::vector<Point> ue_positions;
  Matrix channel_gain;  // N x S, linear power ratio in (0, 1]
  Matrix rsrp_dbm;      // N x S
  std::uint64_t seed = 0;

  int num_ues() const { return static_cast<int>(ue_positions.size()); }
  int num_sbs() const { return static_cast<int>(sbs_positions.size()); }

  bool operator==(const NetworkInstance&) const = default;
};

NetworkInstance generate_topology(const RadioConfig& config, int n_ues, int n_sbs,
                                  std::uint64_t seed);

// Builds an instance from explicit positions and gains (replay, tests).
NetworkInstance make_instance(const RadioConfig& config, std::vector<Point> sbs,
                              std::vector<Point> ues, Matrix channel_gain,
                              std::uint64_t seed = 0);

nlohmann::json to_json(const NetworkInstance& net);
NetworkInstance network_from_json(const nlohmann::json& doc, const RadioConfig& config);

struct SinrTable {
  Matrix gamma;             // N x S, linear
  Matrix interference_dbm;  // N x S, interference plus noise
};

SinrTable compute_sinr(const NetworkInstance& net, const RadioConfig& config);

// Single-connectivity throughput: xi * M_RB * log2(1 + gamma).
double rate_single(int ue, int sbs, double n_rbs, const SinrTable& sinr,
                   const RadioConfig& config);

// Multi-connectivity throughput summed over the assigned SBS set.
double rate_general(int ue, std::span<const int> sbs_set, std::span<const double> beta,
                    const SinrTable& sinr, const RadioConfig& config);

// N x S table of rate_general for a singleton set with beta = 1.
Matrix full_band_rates(const SinrTable& sinr, const RadioConfig& config);

double median_sinr(const SinrTable& sinr);

}  // namespace edgedem::radio
