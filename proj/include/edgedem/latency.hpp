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
#include "edgedem/units.hpp"

namespace edgedem {

// Association index of the unbounded-capacity fallback edge node.
inline constexpr int kVirtualNode = -1;

}  // namespace edgedem

namespace edgedem::latency {

struct LearningBudget {
  double global_accuracy = 0.01;  // epsilon in (0, 1)
  double local_accuracy = 0.1;    // theta in [0, 1)
  double task_constant = 1.0;     // delta
  double default_local_constant = 1.0;
  std::vector<double> local_constants;  // nu_n; falls back to the default

  double local_constant(int ue) const;
};

// ceil(delta * ln(1/eps) / (1 - theta)), at least 1.
int iters_global(const LearningBudget& budget);
// ceil(nu_n * ln(1/theta)), at least 1.
int iters_local(const LearningBudget& budget, int ue);

struct UeComputeProfile {
  double cycles_per_sample = 1e7;
  double data_size = 100.0;  // training samples D_n
  double cpu_freq_hz = 1e9;
  double f_min_hz = 5e8;
  double f_max_hz = 1e9;
  double model_bytes = 2.712e6;

  void validate() const;
};

enum class ModelSizeDist { kUniform, kLogNormal };

// Per-UE hardware and workload draws.
struct ProfileConfig {
  double cycles_min = 1e7;
  double cycles_max = 3e7;
  double f_min_hz = 5e8;
  double f_max_lo_hz = 1e9;  // f_max is drawn per UE from [lo, hi]
  double f_max_hi_hz = 2e9;
  double model_kb_min = 1000.0;
  double model_kb_max = 8000.0;
  ModelSizeDist model_size_dist = ModelSizeDist::kUniform;
  double model_kb_median = 2250.0;  // lognormal only
  double model_kb_sigma = 0.611;
  double data_min = 40.0;  // used when no data sizes are supplied
  double data_max = 200.0;

  void validate() const;
};

// Profiles run at f_max. data_sizes, when given, fixes D_n per UE.
std::vector<UeComputeProfile> generate_profiles(const ProfileConfig& config, int n_ues,
                                                std::uint64_t seed,
                                                std::span<const double> data_sizes = {});

// I_local * c_n * D_n / f_n.
Seconds t_comp(const UeComputeProfile& profile, const LearningBudget& budget, int ue);
// Upload time of a model of the given size.
Seconds t_com(Bytes model, BitsPerSecond rate);

// I_global * max over members of (t_com + t_comp); members index into the
// per-UE vectors.
Seconds global_delay_sbs(std::span<const int> members, std::span<const double> comp_s,
                         std::span<const double> com_s, int i_global);

// Rate of every UE towards every SBS at the full SBS band (beta = 1), plus the
// fixed per-UE rate of the virtual node.
struct LinkTable {
  Matrix rate_coeff;  // N x S, bits/s
  double virtual_rate_bps = 0.0;
};

struct Association {
  std::vector<int> serving;         // SBS index or kVirtualNode
  std::vector<double> beta;         // share of the serving SBS band
  std::vector<double> cpu_freq_hz;  // empty: use the profile frequency
};

struct DelayReport {
  std::vector<double> per_ue_comp_s;
  std::vector<double> per_ue_com_s;
  std::vector<double> per_sbs_global_s;  // 0 for an SBS with no members
  double virtual_global_s = 0.0;         // delay of the virtual-node members
  double system_global_s = 0.0;
};

DelayReport global_delay_system(const Association& association, const LinkTable& links,
                                const LearningBudget& budget,
                                std::span<const UeComputeProfile> profiles);

}  // namespace edgedem::latency
