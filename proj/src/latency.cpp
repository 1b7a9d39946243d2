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

#include "edgedem/latency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgedem/error.hpp"
#include "edgedem/rng.hpp"

namespace edgedem::latency {

double LearningBudget::local_constant(int ue) const {
  if (ue >= 0 && static_cast<std::size_t>(ue) < local_constants.size())
    return local_constants[static_cast<std::size_t>(ue)];
  return default_local_constant;
}

int iters_global(const LearningBudget& budget) {
  const double eps = budget.global_accuracy;
  const double theta = budget.local_accuracy;
  if (!(eps > 0.0 && eps < 1.0) || !(theta >= 0.0 && theta < 1.0))
    throw Error(ErrorCode::kInvalidAccuracy, "need 0 < epsilon < 1 and 0 <= theta < 1");
  if (!(budget.task_constant > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "task constant must be positive");
  double raw = budget.task_constant * std::log(1.0 / eps) / (1.0 - theta);
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

int iters_local(const LearningBudget& budget, int ue) {
  const double theta = budget.local_accuracy;
  if (!(theta > 0.0 && theta < 1.0))
    throw Error(ErrorCode::kInvalidAccuracy, "need 0 < theta < 1");
  double nu = budget.local_constant(ue);
  if (!(nu > 0.0)) throw Error(ErrorCode::kInvalidArgument, "local constant must be positive");
  return std::max(1, static_cast<int>(std::ceil(nu * std::log(1.0 / theta))));
}

void UeComputeProfile::validate() const {
  if (!(cycles_per_sample > 0) || !(data_size > 0) || !(model_bytes > 0) || !(f_min_hz > 0))
    throw Error(ErrorCode::kInvalidArgument, "compute profile values must be positive");
  if (!(f_min_hz <= f_max_hz) || !(cpu_freq_hz >= f_min_hz && cpu_freq_hz <= f_max_hz))
    throw Error(ErrorCode::kInvalidArgument, "CPU frequency outside [f_min, f_max]");
}

void ProfileConfig::validate() const {
  if (!(cycles_min > 0 && cycles_min <= cycles_max))
    throw Error(ErrorCode::kInvalidConfig, "cycles range must be positive and ordered");
  if (!(f_min_hz > 0 && f_min_hz <= f_max_lo_hz && f_max_lo_hz <= f_max_hi_hz))
    throw Error(ErrorCode::kInvalidConfig, "need 0 < f_min <= f_max range");
  if (!(model_kb_min > 0 && model_kb_min <= model_kb_max))
    throw Error(ErrorCode::kInvalidConfig, "model size range must be positive and ordered");
  if (model_size_dist == ModelSizeDist::kLogNormal &&
      !(model_kb_median > 0 && model_kb_sigma >= 0))
    throw Error(ErrorCode::kInvalidConfig, "lognormal model size needs median > 0, sigma >= 0");
  if (!(data_min > 0 && data_min <= data_max))
    throw Error(ErrorCode::kInvalidConfig, "data size range must be positive and ordered");
}

std::vector<UeComputeProfile> generate_profiles(const ProfileConfig& config, int n_ues,
                                                std::uint64_t seed,
                                                std::span<const double> data_sizes) {
  config.validate();
  if (!data_sizes.empty() && data_sizes.size() != static_cast<std::size_t>(n_ues))
    throw Error(ErrorCode::kInvalidArgument, "one data size per UE required");
  std::vector<UeComputeProfile> out;
  out.reserve(static_cast<std::size_t>(std::max(n_ues, 0)));
  for (int n = 0; n < n_ues; ++n) {
    Rng rng = Rng::derive(seed, Stream::kProfiles, static_cast<std::uint64_t>(n));
    UeComputeProfile p;
    p.cycles_per_sample = rng.uniform(config.cycles_min, config.cycles_max);
    p.f_min_hz = config.f_min_hz;
    p.f_max_hz = rng.uniform(config.f_max_lo_hz, config.f_max_hi_hz);
    p.cpu_freq_hz = p.f_max_hz;
    double kb = 0.0;
    if (config.model_size_dist == ModelSizeDist::kUniform) {
      kb = rng.uniform(config.model_kb_min, config.model_kb_max);
    } else {
      // Redraw until inside the configured range; fall back to clamping.
      for (int attempt = 0; attempt < 64; ++attempt) {
        kb = config.model_kb_median * std::exp(config.model_kb_sigma * rng.normal());
        if (kb >= config.model_kb_min && kb <= config.model_kb_max) break;
      }
      kb = std::clamp(kb, config.model_kb_min, config.model_kb_max);
    }
    p.model_bytes = kilobytes(kb).value;
    double d = rng.log_uniform(config.data_min, config.data_max);
    p.data_size = data_sizes.empty() ? std::round(d) : data_sizes[static_cast<std::size_t>(n)];
    out.push_back(p);
  }
  return out;
}

Seconds t_comp(const UeComputeProfile& profile, const LearningBudget& budget, int ue) {
  Cycles work(profile.cycles_per_sample * profile.data_size);
  return (work / Hertz(profile.cpu_freq_hz)) * static_cast<double>(iters_local(budget, ue));
}

Seconds t_com(Bytes model, BitsPerSecond rate) {
  if (!(rate.value > 0.0)) throw Error(ErrorCode::kZeroRate, "non-positive upload rate");
  return to_bits(model) / rate;
}

Seconds global_delay_sbs(std::span<const int> members, std::span<const double> comp_s,
                         std::span<const double> com_s, int i_global) {
  if (members.empty()) throw Error(ErrorCode::kEmptySbs, "SBS has no associated UEs");
  double worst = 0.0;
  for (int n : members) {
    auto i = static_cast<std::size_t>(n);
    worst = std::max(worst, com_s[i] + comp_s[i]);
  }
  return Seconds(i_global * worst);
}

DelayReport global_delay_system(const Association& association, const LinkTable& links,
                                const LearningBudget& budget,
                                std::span<const UeComputeProfile> profiles) {
  const std::size_t n_ues = profiles.size();
  const std::size_t n_sbs = links.rate_coeff.cols();
  if (association.serving.size() != n_ues || association.beta.size() != n_ues)
    throw Error(ErrorCode::kUnassignedUe, "association does not cover every UE");
  const int i_global = iters_global(budget);

  DelayReport report;
  report.per_ue_comp_s.resize(n_ues);
  report.per_ue_com_s.resize(n_ues);
  report.per_sbs_global_s.assign(n_sbs, 0.0);

  std::vector<std::vector<int>> members(n_sbs);
  std::vector<int> virtual_members;
  for (std::size_t n = 0; n < n_ues; ++n) {
    int s = association.serving[n];
    UeComputeProfile profile = profiles[n];
    if (!association.cpu_freq_hz.empty()) profile.cpu_freq_hz = association.cpu_freq_hz.at(n);
    report.per_ue_comp_s[n] = t_comp(profile, budget, static_cast<int>(n)).value;

    double rate;
    if (s == kVirtualNode) {
      rate = links.virtual_rate_bps;
      virtual_members.push_back(static_cast<int>(n));
    } else if (s >= 0 && static_cast<std::size_t>(s) < n_sbs) {
      double beta = association.beta[n];
      if (!(beta > 0.0 && beta <= 1.0 + 1e-12))
        throw Error(ErrorCode::kUnassignedUe,
                    "UE " + std::to_string(n) + " has no bandwidth at its SBS");
      rate = beta * links.rate_coeff(n, static_cast<std::size_t>(s));
      members[static_cast<std::size_t>(s)].push_back(static_cast<int>(n));
    } else {
      throw Error(ErrorCode::kUnassignedUe, "UE " + std::to_string(n) + " is not associated");
    }
    report.per_ue_com_s[n] = t_com(Bytes(profiles[n].model_bytes), BitsPerSecond(rate)).value;
  }

  for (std::size_t s = 0; s < n_sbs; ++s) {
    if (members[s].empty()) continue;
    report.per_sbs_global_s[s] =
        global_delay_sbs(members[s], report.per_ue_comp_s, report.per_ue_com_s, i_global).value;
  }
  if (!virtual_members.empty())
    report.virtual_global_s =
        global_delay_sbs(virtual_members, report.per_ue_comp_s, report.per_ue_com_s, i_global)
            .value;
  report.system_global_s = report.virtual_global_s;
  for (double d : report.per_sbs_global_s)
    report.system_global_s = std::max(report.system_global_s, d);
  return report;
}

}  // namespace edgedem::latency
