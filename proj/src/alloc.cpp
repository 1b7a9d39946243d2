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

#include "edgedem/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgedem/error.hpp"

namespace edgedem::alloc {

void AllocProblem::validate() const {
  const std::size_t n = bits.size();
  if (rate_coeff.size() != n || comp_time_s.size() != n)
    throw Error(ErrorCode::kInvalidArgument, "allocation problem vectors differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rate_coeff[i] > 0.0) || !std::isfinite(rate_coeff[i]))
      throw Error(ErrorCode::kZeroRate, "member without a usable link");
    if (!(bits[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "model size must be positive");
    if (!(comp_time_s[i] >= 0.0))
      throw Error(ErrorCode::kInvalidArgument, "computation time must be non-negative");
  }
  if (global_iters < 1) throw Error(ErrorCode::kInvalidArgument, "global iterations < 1");
}

std::vector<double> optimal_freq(std::span<const latency::UeComputeProfile> profiles) {
  std::vector<double> f;
  f.reserve(profiles.size());
  for (const auto& p : profiles) f.push_back(p.f_max_hz);
  return f;
}

double member_delay(const AllocProblem& problem, std::size_t i, double beta) {
  return problem.comp_time_s[i] + problem.bits[i] / (beta * problem.rate_coeff[i]);
}

double objective_for(const AllocProblem& problem, std::span<const double> beta) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i)
    worst = std::max(worst, member_delay(problem, i, beta[i]));
  return problem.global_iters * worst;
}

namespace {

// Sum of the minimal shares that meet delay target tau; each capped at 1.
double required_share(const AllocProblem& p, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double slack = tau - p.comp_time_s[i];
    if (slack <= 0.0) return std::numeric_limits<double>::infinity();
    total += std::min(1.0, p.bits[i] / (p.rate_coeff[i] * slack));
  }
  return total;
}

}  // namespace

AllocSolution solve_beta(const AllocProblem& problem, const SolverOptions& options) {
  problem.validate();
  AllocSolution sol;
  sol.cpu_freq_hz = problem.cpu_freq_hz;
  const std::size_t n = problem.size();
  if (n == 0) return sol;

  if (n == 1) {
    sol.beta = {1.0};
    sol.objective_s = objective_for(problem, sol.beta);
    return sol;
  }

  // Delay at the whole band is a lower bound; the equal split is feasible.
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double full = problem.bits[i] / problem.rate_coeff[i];
    lo = std::max(lo, problem.comp_time_s[i] + full);
    hi = std::max(hi, problem.comp_time_s[i] + static_cast<double>(n) * full);
  }

  const double target = 0.25 * options.tolerance_s;
  while (hi - lo > target) {
    if (++sol.iterations > options.max_steps)
      throw Error(ErrorCode::kNonConvergence, "bisection exceeded the step cap");
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // floating-point resolution reached
    if (required_share(problem, mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }

  // Newton polish on sum(beta(tau)) = 1; the sum is smooth and convex in tau,
  // so starting from the feasible end converges from above.
  double tau = hi;
  for (int k = 0; k < 4; ++k) {
    double excess = required_share(problem, tau) - 1.0, slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double slack = tau - problem.comp_time_s[i];
      double b = problem.bits[i] / (problem.rate_coeff[i] * slack);
      if (b < 1.0) slope -= b / slack;
    }
    if (slope >= 0.0 || excess >= 0.0) break;
    double next = tau - excess / slope;
    if (!(next > lo && next < tau)) break;
    tau = next;
  }

  sol.beta.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sol.beta[i] = std::min(1.0, problem.bits[i] /
                                    (problem.rate_coeff[i] * (tau - problem.comp_time_s[i])));
    total += sol.beta[i];
  }
  // Hand the leftover budget out proportionally so the constraint is tight.
  for (double& b : sol.beta) b = std::clamp(b / total, kMinBeta, 1.0);
  sol.objective_s = objective_for(problem, sol.beta);
  return sol;
}

bool verify_kkt(const AllocProblem& problem, const AllocSolution& solution, double tol) {
  const std::size_t n = problem.size();
  if (solution.beta.size() != n) return false;
  if (n == 0) return true;
  double total = std::accumulate(solution.beta.begin(), solution.beta.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) return false;
  const double per_iter = solution.objective_s / problem.global_iters;
  for (std::size_t i = 0; i < n; ++i) {
    if (solution.beta[i] >= 1.0 - 1e-12) continue;
    if (std::abs(member_delay(problem, i, solution.beta[i]) - per_iter) > tol) return false;
  }
  return true;
}

AllocSolution uniform_split(const AllocProblem& problem) {
  problem.validate();
  AllocSolution sol;
  sol.cpu_freq_hz = problem.cpu_freq_hz;
  if (problem.size() == 0) return sol;
  sol.beta.assign(problem.size(), 1.0 / static_cast<double>(problem.size()));
  sol.objective_s = objective_for(problem, sol.beta);
  return sol;
}

}  // namespace edgedem::alloc
