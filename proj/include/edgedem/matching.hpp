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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "edgedem/alloc.hpp"
#include "edgedem/latency.hpp"
#include "edgedem/matrix.hpp"
#include "edgedem/radio.hpp"

namespace edgedem::matching {

// Many-to-one assignment of UEs to SBSs; kVirtualNode absorbs overflow.
struct Matching {
  std::vector<int> assignment;
  std::vector<int> quotas;  // q_s per real SBS

  int num_ues() const { return static_cast<int>(assignment.size()); }
  int num_sbs() const { return static_cast<int>(quotas.size()); }
  // Members of s in ascending UE order; s may be kVirtualNode.
  std::vector<int> members(int s) const;
  int load(int s) const;
  bool has_room(int s) const { return s == kVirtualNode || load(s) < quotas[static_cast<std::size_t>(s)]; }
  // Indices in range and every quota respected.
  bool is_valid() const;

  bool operator==(const Matching&) const = default;
};

// Fixed inputs of the association game for one network instance.
struct MatchingContext {
  Matrix rate_coeff;  // N x S, bits/s at beta = 1
  double virtual_rate_bps = 0.0;
  Matrix rsrp_dbm;
  Matrix distance_m;
  std::vector<double> bits;
  std::vector<double> comp_time_s;  // at the optimal (maximum) frequency
  std::vector<double> cpu_freq_hz;
  int global_iters = 1;
  std::vector<int> quotas;
  alloc::SolverOptions solver;

  int num_ues() const { return static_cast<int>(bits.size()); }
  int num_sbs() const { return static_cast<int>(quotas.size()); }
};

// virtual_rate_bps <= 0 selects one RB at the median SINR of the instance.
// Empty quotas default to the sub-band count of each SBS.
MatchingContext make_context(const radio::NetworkInstance& net, const radio::RadioConfig& radio,
                             std::span<const latency::UeComputeProfile> profiles,
                             const latency::LearningBudget& budget, std::vector<int> quotas = {},
                             const alloc::SolverOptions& solver = {},
                             double virtual_rate_bps = 0.0);

alloc::AllocProblem sbs_problem(const MatchingContext& ctx, int sbs, std::span<const int> members);

// Per-iteration-scaled delay of a UE parked at the virtual node.
double virtual_delay(const MatchingContext& ctx, int ue);

enum class AllocMode { kOptimal, kUniform };

// A matching together with the allocation of every SBS under it.
struct Evaluation {
  Matching matching;
  AllocMode mode = AllocMode::kOptimal;
  std::vector<alloc::AllocSolution> allocs;  // per real SBS
  std::vector<double> sbs_delay_s;           // T_s^global, 0 when empty
  std::vector<double> ue_delay_s;            // I_global * (t_com + t_comp)
  double system_delay_s = 0.0;               // T^global
};

Evaluation evaluate(const MatchingContext& ctx, const Matching& matching,
                    AllocMode mode = AllocMode::kOptimal);

latency::Association to_association(const MatchingContext& ctx, const Evaluation& eval);

// U_n = -T^global of the serving SBS (own delay at the virtual node).
double ue_utility(const Evaluation& eval, int ue);
// U_s = -sum over all UEs of T^global, i.e. -N * T^global; an SBS without
// members adds nothing to T^global.
double sbs_utility(const Evaluation& eval);
// -sum of the member delays of one SBS; used to rank UEs, 0 when empty.
double member_cost(const Evaluation& eval, int sbs);

enum class PreferenceBasis { kRsrp, kLatency };

struct PreferenceState {
  std::vector<std::vector<int>> ue_prefs;   // per UE, SBSs best first
  std::vector<std::vector<int>> sbs_prefs;  // per SBS, UEs best first
  PreferenceBasis basis = PreferenceBasis::kRsrp;
};

// The latency basis needs the current evaluation.
PreferenceState build_preferences(const MatchingContext& ctx, PreferenceBasis basis,
                                  const Evaluation* current = nullptr);

// UE-proposing deferred acceptance; UEs rejected everywhere go virtual.
Matching deferred_acceptance(const std::vector<std::vector<int>>& ue_prefs,
                             const std::vector<std::vector<int>>& sbs_prefs,
                             const std::vector<int>& quotas);

// Highest-RSRP association under quotas, overflow to the virtual node.
Matching initial_association(const MatchingContext& ctx);

struct SwapProposal {
  int ue_a = 0;
  int ue_b = -1;  // -1: single move into free capacity
  int sbs_from = 0;
  int sbs_to = 0;

  bool operator==(const SwapProposal&) const = default;
};

Matching apply(const Matching& matching, const SwapProposal& proposal);

// Relative margin for strict/weak utility comparisons.
inline constexpr double kUtilityMargin = 1e-9;

struct ProposalOutcome {
  bool approved = false;
  double system_before_s = 0.0;
  double system_after_s = 0.0;
  std::vector<double> ue_utility_before;  // ue_a, then ue_b if present
  std::vector<double> ue_utility_after;
};

// Evaluates one proposal: every involved UE weakly better off, SBS utilities
// non-decreasing, and a strict drop of T^global.
ProposalOutcome assess(const MatchingContext& ctx, const Evaluation& eval,
                       const SwapProposal& proposal);

// First approved proposal in ascending (n, n', s') order, or nothing.
std::optional<SwapProposal> find_swap_blocking_pair(const MatchingContext& ctx,
                                                    const Evaluation& eval,
                                                    const PreferenceState& prefs);

// Every candidate proposal under the current matching, in scan order.
std::vector<SwapProposal> enumerate_proposals(const Evaluation& eval);

struct SwapEvent {
  int index = 0;
  SwapProposal proposal;
  double delay_before_s = 0.0;
  double delay_after_s = 0.0;
};

struct MatchingStats {
  int swaps = 0;
  double wall_seconds = 0.0;
};

struct MatchingResult {
  Evaluation evaluation;
  MatchingStats stats;
  std::vector<SwapEvent> events;
};

MatchingResult run_matching(const MatchingContext& ctx, const Matching& start,
                            const PreferenceState& prefs);
// Starts from the RSRP association.
MatchingResult run_matching(const MatchingContext& ctx);

// Distance-weighted random association respecting quotas.
Matching baseline_random(const MatchingContext& ctx, std::uint64_t seed);
// Equal bandwidth split on top of a given matching.
Evaluation baseline_uniform(const MatchingContext& ctx, const Matching& matching);
// Deferred acceptance with UE preferences frozen at the RSRP ranking.
Matching baseline_one_sided(const MatchingContext& ctx);

inline constexpr double kOptimalSearchLimit = 1e7;
// Exhaustive search over quota-feasible assignments; TooLarge past the limit.
Matching baseline_optimal(const MatchingContext& ctx);

}  // namespace edgedem::matching
