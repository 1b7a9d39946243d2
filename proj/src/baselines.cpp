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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "edgedem/error.hpp"
#include "edgedem/matching.hpp"
#include "edgedem/rng.hpp"

namespace edgedem::matching {

Matching baseline_random(const MatchingContext& ctx, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, Stream::kRandomBaseline);
  Matching m;
  m.quotas = ctx.quotas;
  m.assignment.assign(static_cast<std::size_t>(ctx.num_ues()), kVirtualNode);
  std::vector<int> load(static_cast<std::size_t>(ctx.num_sbs()), 0);
  std::vector<double> weight(static_cast<std::size_t>(ctx.num_sbs()));

  for (int n = 0; n < ctx.num_ues(); ++n) {
    double total = 0.0;
    for (int s = 0; s < ctx.num_sbs(); ++s) {
      auto si = static_cast<std::size_t>(s);
      double d = std::max(1.0, ctx.distance_m(static_cast<std::size_t>(n), si));
      weight[si] = load[si] < ctx.quotas[si] ? 1.0 / (d * d) : 0.0;
      total += weight[si];
    }
    if (total <= 0.0) continue;  // every SBS full
    double u = rng.uniform() * total;
    int pick = -1;
    for (int s = 0; s < ctx.num_sbs(); ++s) {
      auto si = static_cast<std::size_t>(s);
      if (weight[si] <= 0.0) continue;
      pick = s;
      if (u < weight[si]) break;
      u -= weight[si];
    }
    m.assignment[static_cast<std::size_t>(n)] = pick;
    ++load[static_cast<std::size_t>(pick)];
  }
  return m;
}

Evaluation baseline_uniform(const MatchingContext& ctx, const Matching& matching) {
  return evaluate(ctx, matching, AllocMode::kUniform);
}

Matching baseline_one_sided(const MatchingContext& ctx) {
  auto rsrp = build_preferences(ctx, PreferenceBasis::kRsrp);
  // SBSs rank UEs by the delay each would incur alone on the full band.
  std::vector<std::vector<int>> sbs_prefs;
  for (int s = 0; s < ctx.num_sbs(); ++s) {
    std::vector<int> order(static_cast<std::size_t>(ctx.num_ues()));
    for (int n = 0; n < ctx.num_ues(); ++n) order[static_cast<std::size_t>(n)] = n;
    auto cost = [&](int n) {
      auto i = static_cast<std::size_t>(n);
      return ctx.comp_time_s[i] + ctx.bits[i] / ctx.rate_coeff(i, static_cast<std::size_t>(s));
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cost(a) < cost(b); });
    sbs_prefs.push_back(std::move(order));
  }
  return deferred_acceptance(rsrp.ue_prefs, sbs_prefs, ctx.quotas);
}

namespace {

struct OptimalSearch {
  const MatchingContext& ctx;
  std::vector<std::unordered_map<std::uint32_t, double>> cache;
  std::vector<double> virtual_s;
  std::vector<std::uint32_t> mask;
  std::vector<int> load;
  std::vector<int> current;
  std::vector<int> best;
  double best_delay = std::numeric_limits<double>::infinity();

  explicit OptimalSearch(const MatchingContext& c)
      : ctx(c),
        cache(static_cast<std::size_t>(c.num_sbs())),
        mask(static_cast<std::size_t>(c.num_sbs()), 0),
        load(static_cast<std::size_t>(c.num_sbs()), 0),
        current(static_cast<std::size_t>(c.num_ues()), kVirtualNode) {
    for (int n = 0; n < c.num_ues(); ++n) virtual_s.push_back(virtual_delay(c, n));
  }

  double cell_delay(int s) {
    auto si = static_cast<std::size_t>(s);
    std::uint32_t m = mask[si];
    if (m == 0) return 0.0;
    auto it = cache[si].find(m);
    if (it != cache[si].end()) return it->second;
    std::vector<int> members;
    for (int n = 0; n < ctx.num_ues(); ++n)
      if (m & (1u << n)) members.push_back(n);
    double t = alloc::solve_beta(sbs_problem(ctx, s, members), ctx.solver).objective_s;
    cache[si].emplace(m, t);
    return t;
  }

  // virtual_worst: max delay among UEs already parked at the virtual node.
  void visit(int n, double virtual_worst) {
    if (virtual_worst >= best_delay) return;
    if (n == ctx.num_ues()) {
      double t = virtual_worst;
      for (int s = 0; s < ctx.num_sbs() && t < best_delay; ++s) t = std::max(t, cell_delay(s));
      if (t < best_delay) {
        best_delay = t;
        best = current;
      }
      return;
    }
    auto ni = static_cast<std::size_t>(n);
    for (int s = 0; s < ctx.num_sbs(); ++s) {
      auto si = static_cast<std::size_t>(s);
      if (load[si] >= ctx.quotas[si]) continue;
      ++load[si];
      mask[si] |= 1u << n;
      current[ni] = s;
      visit(n + 1, virtual_worst);
      mask[si] &= ~(1u << n);
      --load[si];
    }
    current[ni] = kVirtualNode;
    visit(n + 1, std::max(virtual_worst, virtual_s[ni]));
  }
};

}  // namespace

Matching baseline_optimal(const MatchingContext& ctx) {
  double space = std::pow(static_cast<double>(ctx.num_sbs() + 1), ctx.num_ues());
  if (space > kOptimalSearchLimit || ctx.num_ues() > 31)
    throw Error(ErrorCode::kTooLarge, "exhaustive association search exceeds the size guard");
  OptimalSearch search(ctx);
  search.visit(0, 0.0);
  Matching m;
  m.quotas = ctx.quotas;
  m.assignment = search.best;
  return m;
}

}  // namespace edgedem::matching
