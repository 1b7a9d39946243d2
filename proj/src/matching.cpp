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

#include "edgedem/matching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "edgedem/error.hpp"

namespace edgedem::matching {

std::vector<int> Matching::members(int s) const {
  std::vector<int> out;
  for (int n = 0; n < num_ues(); ++n)
    if (assignment[static_cast<std::size_t>(n)] == s) out.push_back(n);
  return out;
}

int Matching::load(int s) const {
  return static_cast<int>(std::count(assignment.begin(), assignment.end(), s));
}

bool Matching::is_valid() const {
  std::vector<int> loads(quotas.size(), 0);
  for (int s : assignment) {
    if (s == kVirtualNode) continue;
    if (s < 0 || s >= num_sbs()) return false;
    ++loads[static_cast<std::size_t>(s)];
  }
  for (std::size_t s = 0; s < quotas.size(); ++s)
    if (loads[s] > quotas[s]) return false;
  return true;
}

MatchingContext make_context(const radio::NetworkInstance& net, const radio::RadioConfig& radio,
                             std::span<const latency::UeComputeProfile> profiles,
                             const latency::LearningBudget& budget, std::vector<int> quotas,
                             const alloc::SolverOptions& solver, double virtual_rate_bps) {
  const int n_ues = net.num_ues();
  const int n_sbs = net.num_sbs();
  if (n_ues == 0 || n_sbs == 0) throw Error(ErrorCode::kEmptyNetwork, "network has no UEs or SBSs");
  if (profiles.size() != static_cast<std::size_t>(n_ues))
    throw Error(ErrorCode::kInvalidArgument, "one compute profile per UE required");

  auto sinr = radio::compute_sinr(net, radio);
  MatchingContext ctx;
  ctx.rate_coeff = radio::full_band_rates(sinr, radio);
  ctx.virtual_rate_bps = virtual_rate_bps > 0.0
                             ? virtual_rate_bps
                             : radio.rb_bandwidth_hz * std::log2(1.0 + radio::median_sinr(sinr));
  ctx.rsrp_dbm = net.rsrp_dbm;
  ctx.distance_m = Matrix(static_cast<std::size_t>(n_ues), static_cast<std::size_t>(n_sbs));
  for (std::size_t n = 0; n < static_cast<std::size_t>(n_ues); ++n)
    for (std::size_t s = 0; s < static_cast<std::size_t>(n_sbs); ++s)
      ctx.distance_m(n, s) = radio::distance(net.ue_positions[n], net.sbs_positions[s]);

  ctx.global_iters = latency::iters_global(budget);
  for (int n = 0; n < n_ues; ++n) {
    latency::UeComputeProfile p = profiles[static_cast<std::size_t>(n)];
    p.validate();
    p.cpu_freq_hz = p.f_max_hz;
    ctx.bits.push_back(to_bits(Bytes(p.model_bytes)).value);
    ctx.comp_time_s.push_back(latency::t_comp(p, budget, n).value);
    ctx.cpu_freq_hz.push_back(p.f_max_hz);
  }

  if (quotas.empty())
    for (int s = 0; s < n_sbs; ++s) quotas.push_back(radio.subbands_of(s));
  if (quotas.size() != static_cast<std::size_t>(n_sbs))
    throw Error(ErrorCode::kInvalidArgument, "one quota per SBS required");
  for (int q : quotas)
    if (q < 0) throw Error(ErrorCode::kInvalidArgument, "quota must be non-negative");
  ctx.quotas = std::move(quotas);
  ctx.solver = solver;
  return ctx;
}

alloc::AllocProblem sbs_problem(const MatchingContext& ctx, int sbs, std::span<const int> members) {
  alloc::AllocProblem p;
  p.global_iters = ctx.global_iters;
  for (int n : members) {
    auto i = static_cast<std::size_t>(n);
    p.ues.push_back(n);
    p.bits.push_back(ctx.bits[i]);
    p.rate_coeff.push_back(ctx.rate_coeff(i, static_cast<std::size_t>(sbs)));
    p.comp_time_s.push_back(ctx.comp_time_s[i]);
    p.cpu_freq_hz.push_back(ctx.cpu_freq_hz[i]);
  }
  return p;
}

double virtual_delay(const MatchingContext& ctx, int ue) {
  auto i = static_cast<std::size_t>(ue);
  return ctx.global_iters * (ctx.comp_time_s[i] + ctx.bits[i] / ctx.virtual_rate_bps);
}

namespace {

alloc::AllocSolution solve(const MatchingContext& ctx, int sbs, std::span<const int> members,
                           AllocMode mode) {
  auto problem = sbs_problem(ctx, sbs, members);
  return mode == AllocMode::kOptimal ? alloc::solve_beta(problem, ctx.solver)
                                     : alloc::uniform_split(problem);
}

// Installs the allocation of one SBS and refreshes its member delays.
void install(const MatchingContext& ctx, Evaluation& eval, int s, std::span<const int> members) {
  auto si = static_cast<std::size_t>(s);
  eval.allocs[si] = solve(ctx, s, members, eval.mode);
  eval.sbs_delay_s[si] = eval.allocs[si].objective_s;
  for (std::size_t k = 0; k < members.size(); ++k) {
    auto n = static_cast<std::size_t>(members[k]);
    eval.ue_delay_s[n] =
        ctx.global_iters *
        (ctx.comp_time_s[n] + ctx.bits[n] / (eval.allocs[si].beta[k] * ctx.rate_coeff(n, si)));
  }
}

void refresh_system(const MatchingContext& ctx, Evaluation& eval) {
  double worst = 0.0;
  for (double d : eval.sbs_delay_s) worst = std::max(worst, d);
  for (int n = 0; n < ctx.num_ues(); ++n)
    if (eval.matching.assignment[static_cast<std::size_t>(n)] == kVirtualNode)
      worst = std::max(worst, eval.ue_delay_s[static_cast<std::size_t>(n)]);
  eval.system_delay_s = worst;
}

bool strictly_less(double a, double b) { return a < b - kUtilityMargin * std::abs(b); }
bool weakly_geq(double a, double b) { return a >= b - kUtilityMargin * std::abs(b); }

void check_shape(const MatchingContext& ctx, const Matching& m) {
  if (m.num_ues() != ctx.num_ues() || m.quotas != ctx.quotas)
    throw Error(ErrorCode::kInvalidArgument, "matching does not fit the context");
  if (!m.is_valid()) throw Error(ErrorCode::kInvalidArgument, "matching violates a quota");
}

}  // namespace

Evaluation evaluate(const MatchingContext& ctx, const Matching& matching, AllocMode mode) {
  check_shape(ctx, matching);
  Evaluation eval;
  eval.matching = matching;
  eval.mode = mode;
  const auto n_sbs = static_cast<std::size_t>(ctx.num_sbs());
  eval.allocs.resize(n_sbs);
  eval.sbs_delay_s.assign(n_sbs, 0.0);
  eval.ue_delay_s.assign(static_cast<std::size_t>(ctx.num_ues()), 0.0);
  for (int s = 0; s < ctx.num_sbs(); ++s) {
    auto members = matching.members(s);
    if (!members.empty()) install(ctx, eval, s, members);
  }
  for (int n : matching.members(kVirtualNode))
    eval.ue_delay_s[static_cast<std::size_t>(n)] = virtual_delay(ctx, n);
  refresh_system(ctx, eval);
  return eval;
}

latency::Association to_association(const MatchingContext& ctx, const Evaluation& eval) {
  latency::Association a;
  const auto n_ues = static_cast<std::size_t>(ctx.num_ues());
  a.serving = eval.matching.assignment;
  a.beta.assign(n_ues, 1.0);
  a.cpu_freq_hz = ctx.cpu_freq_hz;
  for (std::size_t s = 0; s < eval.allocs.size(); ++s) {
    const auto& sol = eval.allocs[s];
    auto members = eval.matching.members(static_cast<int>(s));
    for (std::size_t k = 0; k < members.size() && k < sol.beta.size(); ++k)
      a.beta[static_cast<std::size_t>(members[k])] = sol.beta[k];
  }
  return a;
}

double ue_utility(const Evaluation& eval, int ue) {
  int s = eval.matching.assignment.at(static_cast<std::size_t>(ue));
  if (s == kVirtualNode) return -eval.ue_delay_s[static_cast<std::size_t>(ue)];
  return -eval.sbs_delay_s[static_cast<std::size_t>(s)];
}

double sbs_utility(const Evaluation& eval) {
  return -static_cast<double>(eval.matching.num_ues()) * eval.system_delay_s;
}

double member_cost(const Evaluation& eval, int sbs) {
  double total = 0.0;
  for (int n : eval.matching.members(sbs)) total += eval.ue_delay_s[static_cast<std::size_t>(n)];
  return -total;
}

namespace {

// Indices 0..count-1 sorted by key, lower index first on ties.
template <class Key>
std::vector<int> ranked(int count, Key key) {
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  return order;
}

std::vector<std::vector<int>> rsrp_ue_prefs(const MatchingContext& ctx) {
  std::vector<std::vector<int>> prefs;
  for (int n = 0; n < ctx.num_ues(); ++n)
    prefs.push_back(ranked(ctx.num_sbs(), [&](int s) {
      return -ctx.rsrp_dbm(static_cast<std::size_t>(n), static_cast<std::size_t>(s));
    }));
  return prefs;
}

// UEs ranked by the delay they would incur alone on the full SBS band.
std::vector<std::vector<int>> standalone_sbs_prefs(const MatchingContext& ctx) {
  std::vector<std::vector<int>> prefs;
  for (int s = 0; s < ctx.num_sbs(); ++s)
    prefs.push_back(ranked(ctx.num_ues(), [&](int n) {
      auto i = static_cast<std::size_t>(n);
      return ctx.comp_time_s[i] + ctx.bits[i] / ctx.rate_coeff(i, static_cast<std::size_t>(s));
    }));
  return prefs;
}

}  // namespace

PreferenceState build_preferences(const MatchingContext& ctx, PreferenceBasis basis,
                                  const Evaluation* current) {
  PreferenceState state;
  state.basis = basis;
  if (basis == PreferenceBasis::kRsrp) {
    state.ue_prefs = rsrp_ue_prefs(ctx);
    for (int s = 0; s < ctx.num_sbs(); ++s)
      state.sbs_prefs.push_back(ranked(ctx.num_ues(), [&](int n) {
        return -ctx.rsrp_dbm(static_cast<std::size_t>(n), static_cast<std::size_t>(s));
      }));
    return state;
  }

  if (current == nullptr)
    throw Error(ErrorCode::kInvalidArgument, "latency preferences need a current evaluation");
  // A UE ranks each SBS by the aggregation delay it would see after joining.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(ctx.num_sbs()));
  for (int s = 0; s < ctx.num_sbs(); ++s) members[static_cast<std::size_t>(s)] = current->matching.members(s);
  for (int n = 0; n < ctx.num_ues(); ++n) {
    std::vector<double> seen(static_cast<std::size_t>(ctx.num_sbs()));
    for (int s = 0; s < ctx.num_sbs(); ++s) {
      auto si = static_cast<std::size_t>(s);
      if (current->matching.assignment[static_cast<std::size_t>(n)] == s) {
        seen[si] = current->sbs_delay_s[si];
        continue;
      }
      auto joined = members[si];
      joined.insert(std::upper_bound(joined.begin(), joined.end(), n), n);
      seen[si] = solve(ctx, s, joined, current->mode).objective_s;
    }
    state.ue_prefs.push_back(
        ranked(ctx.num_sbs(), [&](int s) { return seen[static_cast<std::size_t>(s)]; }));
  }
  state.sbs_prefs = standalone_sbs_prefs(ctx);
  return state;
}

Matching deferred_acceptance(const std::vector<std::vector<int>>& ue_prefs,
                             const std::vector<std::vector<int>>& sbs_prefs,
                             const std::vector<int>& quotas) {
  const int n_ues = static_cast<int>(ue_prefs.size());
  const int n_sbs = static_cast<int>(quotas.size());
  if (sbs_prefs.size() != quotas.size())
    throw Error(ErrorCode::kInvalidArgument, "one SBS preference list per quota required");

  // rank[s][n]: position of n in the list of s, or n_ues when unacceptable.
  std::vector<std::vector<int>> rank(static_cast<std::size_t>(n_sbs),
                                     std::vector<int>(static_cast<std::size_t>(n_ues), n_ues));
  for (int s = 0; s < n_sbs; ++s) {
    const auto& list = sbs_prefs[static_cast<std::size_t>(s)];
    for (std::size_t k = 0; k < list.size(); ++k)
      rank[static_cast<std::size_t>(s)][static_cast<std::size_t>(list[k])] = static_cast<int>(k);
  }

  Matching m;
  m.assignment.assign(static_cast<std::size_t>(n_ues), kVirtualNode);
  m.quotas = quotas;
  std::vector<std::size_t> next(static_cast<std::size_t>(n_ues), 0);
  std::vector<std::vector<int>> held(static_cast<std::size_t>(n_sbs));
  std::vector<int> free_ues(static_cast<std::size_t>(n_ues));
  std::iota(free_ues.begin(), free_ues.end(), 0);
  std::reverse(free_ues.begin(), free_ues.end());  // pop lowest index first

  while (!free_ues.empty()) {
    int n = free_ues.back();
    free_ues.pop_back();
    auto ni = static_cast<std::size_t>(n);
    const auto& list = ue_prefs[ni];
    if (next[ni] >= list.size()) continue;  // rejected everywhere: stays virtual
    int s = list[next[ni]++];
    auto si = static_cast<std::size_t>(s);
    if (rank[si][ni] >= n_ues || quotas[si] == 0) {
      free_ues.push_back(n);
      continue;
    }
    auto& h = held[si];
    h.push_back(n);
    m.assignment[ni] = s;
    if (static_cast<int>(h.size()) > quotas[si]) {
      auto worst = std::max_element(h.begin(), h.end(), [&](int a, int b) {
        return rank[si][static_cast<std::size_t>(a)] < rank[si][static_cast<std::size_t>(b)];
      });
      int out = *worst;
      h.erase(worst);
      m.assignment[static_cast<std::size_t>(out)] = kVirtualNode;
      free_ues.push_back(out);
    }
  }
  return m;
}

Matching initial_association(const MatchingContext& ctx) {
  auto prefs = build_preferences(ctx, PreferenceBasis::kRsrp);
  return deferred_acceptance(prefs.ue_prefs, prefs.sbs_prefs, ctx.quotas);
}

Matching apply(const Matching& matching, const SwapProposal& p) {
  Matching out = matching;
  out.assignment.at(static_cast<std::size_t>(p.ue_a)) = p.sbs_to;
  if (p.ue_b >= 0) out.assignment.at(static_cast<std::size_t>(p.ue_b)) = p.sbs_from;
  return out;
}

namespace {

std::vector<int> moved_members(const Matching& m, int s, int leaving, int joining) {
  std::vector<int> out;
  for (int n = 0; n < m.num_ues(); ++n) {
    if (n == leaving) continue;
    if (m.assignment[static_cast<std::size_t>(n)] == s || n == joining) out.push_back(n);
  }
  return out;
}

// T^global contribution of real SBS s with the given members (0 when empty).
double group_delay(const MatchingContext& ctx, int s, std::span<const int> members, AllocMode mode) {
  if (members.empty()) return 0.0;
  return solve(ctx, s, members, mode).objective_s;
}

}  // namespace

ProposalOutcome assess(const MatchingContext& ctx, const Evaluation& eval, const SwapProposal& p) {
  ProposalOutcome out;
  const double before = eval.system_delay_s;
  out.system_before_s = before;
  out.system_after_s = before;
  out.ue_utility_before.push_back(ue_utility(eval, p.ue_a));
  if (p.ue_b >= 0) out.ue_utility_before.push_back(ue_utility(eval, p.ue_b));

  // Everything outside the two touched cells keeps its delay.
  double untouched = 0.0;
  for (int s = 0; s < ctx.num_sbs(); ++s)
    if (s != p.sbs_from && s != p.sbs_to)
      untouched = std::max(untouched, eval.sbs_delay_s[static_cast<std::size_t>(s)]);
  for (int n = 0; n < ctx.num_ues(); ++n)
    if (n != p.ue_a && n != p.ue_b &&
        eval.matching.assignment[static_cast<std::size_t>(n)] == kVirtualNode)
      untouched = std::max(untouched, eval.ue_delay_s[static_cast<std::size_t>(n)]);
  if (!strictly_less(untouched, before)) return out;

  // UE a moves to sbs_to with at most the whole band there.
  auto floor_at = [&](int ue, int s) {
    if (s == kVirtualNode) return virtual_delay(ctx, ue);
    auto i = static_cast<std::size_t>(ue);
    return ctx.global_iters *
           (ctx.comp_time_s[i] + ctx.bits[i] / ctx.rate_coeff(i, static_cast<std::size_t>(s)));
  };
  if (!strictly_less(floor_at(p.ue_a, p.sbs_to), before)) return out;
  if (p.ue_b >= 0 && !strictly_less(floor_at(p.ue_b, p.sbs_from), before)) return out;

  double after = untouched;
  auto settle = [&](int s, int leaving, int joining) {
    if (s == kVirtualNode) {
      if (joining >= 0) after = std::max(after, virtual_delay(ctx, joining));
      return 0.0;
    }
    auto members = moved_members(eval.matching, s, leaving, joining);
    double t = group_delay(ctx, s, members, eval.mode);
    after = std::max(after, t);
    return t;
  };
  double t_to = settle(p.sbs_to, p.ue_b, p.ue_a);
  double t_from = settle(p.sbs_from, p.ue_a, p.ue_b);
  out.system_after_s = after;

  out.ue_utility_after.push_back(p.sbs_to == kVirtualNode ? -virtual_delay(ctx, p.ue_a) : -t_to);
  if (p.ue_b >= 0)
    out.ue_utility_after.push_back(p.sbs_from == kVirtualNode ? -virtual_delay(ctx, p.ue_b)
                                                              : -t_from);

  bool ok = strictly_less(after, before);
  for (std::size_t k = 0; k < out.ue_utility_after.size(); ++k)
    ok = ok && weakly_geq(out.ue_utility_after[k], out.ue_utility_before[k]);
  out.approved = ok;
  return out;
}

std::vector<SwapProposal> enumerate_proposals(const Evaluation& eval) {
  const Matching& m = eval.matching;
  std::vector<SwapProposal> out;
  for (int n = 0; n < m.num_ues(); ++n) {
    int from = m.assignment[static_cast<std::size_t>(n)];
    for (int other = n + 1; other < m.num_ues(); ++other) {
      int to = m.assignment[static_cast<std::size_t>(other)];
      if (to != from) out.push_back({n, other, from, to});
    }
    for (int s = 0; s < m.num_sbs(); ++s)
      if (s != from && m.has_room(s)) out.push_back({n, -1, from, s});
    if (from != kVirtualNode) out.push_back({n, -1, from, kVirtualNode});
  }
  return out;
}

std::optional<SwapProposal> find_swap_blocking_pair(const MatchingContext& ctx,
                                                    const Evaluation& eval,
                                                    const PreferenceState& prefs) {
  auto reachable = [&](int ue, int s) {
    if (s == kVirtualNode || prefs.ue_prefs.empty()) return true;
    const auto& list = prefs.ue_prefs[static_cast<std::size_t>(ue)];
    return std::find(list.begin(), list.end(), s) != list.end();
  };
  for (const auto& p : enumerate_proposals(eval)) {
    if (!reachable(p.ue_a, p.sbs_to)) continue;
    if (p.ue_b >= 0 && !reachable(p.ue_b, p.sbs_from)) continue;
    if (assess(ctx, eval, p).approved) return p;
  }
  return std::nullopt;
}

namespace {

Evaluation apply_evaluated(const MatchingContext& ctx, const Evaluation& eval,
                           const SwapProposal& p) {
  Evaluation next = eval;
  next.matching = apply(eval.matching, p);
  for (int s : {p.sbs_from, p.sbs_to}) {
    if (s == kVirtualNode) continue;
    auto si = static_cast<std::size_t>(s);
    auto members = next.matching.members(s);
    if (members.empty()) {
      next.allocs[si] = {};
      next.sbs_delay_s[si] = 0.0;
    } else {
      install(ctx, next, s, members);
    }
  }
  for (int n : {p.ue_a, p.ue_b})
    if (n >= 0 && next.matching.assignment[static_cast<std::size_t>(n)] == kVirtualNode)
      next.ue_delay_s[static_cast<std::size_t>(n)] = virtual_delay(ctx, n);
  refresh_system(ctx, next);
  return next;
}

}  // namespace

MatchingResult run_matching(const MatchingContext& ctx, const Matching& start,
                            const PreferenceState& prefs) {
  auto t0 = std::chrono::steady_clock::now();
  MatchingResult result;
  result.evaluation = evaluate(ctx, start);
  while (auto p = find_swap_blocking_pair(ctx, result.evaluation, prefs)) {
    SwapEvent ev;
    ev.index = result.stats.swaps++;
    ev.proposal = *p;
    ev.delay_before_s = result.evaluation.system_delay_s;
    result.evaluation = apply_evaluated(ctx, result.evaluation, *p);
    ev.delay_after_s = result.evaluation.system_delay_s;
    result.events.push_back(ev);
  }
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

MatchingResult run_matching(const MatchingContext& ctx) {
  return run_matching(ctx, initial_association(ctx),
                      build_preferences(ctx, PreferenceBasis::kRsrp));
}

}  // namespace edgedem::matching
