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

#include <numeric>

#include "doctest.h"
#include "edgedem/alloc.hpp"
#include "edgedem/error.hpp"
#include "edgedem/rng.hpp"
#include "oracles.hpp"

using namespace edgedem;
using namespace edgedem::alloc;

namespace {

AllocProblem random_problem(std::uint64_t seed, int n) {
  Rng rng(seed);
  AllocProblem p;
  p.global_iters = 6;
  for (int i = 0; i < n; ++i) {
    p.ues.push_back(i);
    p.bits.push_back(8.0 * rng.uniform(1e6, 8e6));
    p.rate_coeff.push_back(rng.uniform(2e6, 4e7));
    p.comp_time_s.push_back(rng.uniform(0.5, 20.0));
    p.cpu_freq_hz.push_back(1e9);
  }
  return p;
}

}  // namespace

TEST_SUITE("alloc") {

TEST_CASE("optimal frequency is the maximum frequency") {
  std::vector<latency::UeComputeProfile> ps(3);
  ps[0].f_max_hz = 2e9;
  ps[1].f_max_hz = 1.3e9;
  ps[2].f_max_hz = 1.7e9;
  auto f = optimal_freq(ps);
  CHECK(f == std::vector<double>{2e9, 1.3e9, 1.7e9});
  // Any lower frequency lengthens the computation.
  latency::LearningBudget b;
  auto slow = ps[0];
  slow.cpu_freq_hz = 1.9e9;
  auto fast = ps[0];
  fast.cpu_freq_hz = 2e9;
  CHECK(latency::t_comp(slow, b, 0).value > latency::t_comp(fast, b, 0).value);
}

TEST_CASE("two identical members split evenly") {
  AllocProblem p;
  p.bits = {8e6, 8e6};
  p.rate_coeff = {1e7, 1e7};
  p.comp_time_s = {1.0, 1.0};
  auto s = solve_beta(p);
  CHECK(s.beta[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s.beta[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(verify_kkt(p, s));
}

TEST_CASE("single member takes the whole band") {
  AllocProblem p;
  p.bits = {4e6};
  p.rate_coeff = {2e6};
  p.comp_time_s = {3.0};
  p.global_iters = 2;
  auto s = solve_beta(p);
  CHECK(s.beta[0] == 1.0);
  CHECK(s.objective_s == doctest::Approx(2 * (2.0 + 3.0)));
  CHECK(verify_kkt(p, s));
}

TEST_CASE("exact lattice oracle agrees with exhaustive grid search") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = random_problem(seed, 2 + static_cast<int>(seed % 2));
    CHECK(oracle::lattice_minmax(p, 1e-3) == doctest::Approx(oracle::grid_minmax(p, 1e-3)).epsilon(1e-12));
    CHECK(oracle::lattice_minmax(p, 1e-2) == doctest::Approx(oracle::grid_minmax(p, 1e-2)).epsilon(1e-12));
  }
  // On a fine lattice the solver's objective is matched from above.
  for (std::uint64_t seed = 20; seed <= 30; ++seed) {
    auto p = random_problem(seed, 2 + static_cast<int>(seed % 4));
    double fine = oracle::lattice_minmax(p, 1e-7), exact = solve_beta(p).objective_s;
    CHECK(exact <= fine * (1 + 1e-12));
    CHECK(exact == doctest::Approx(fine).epsilon(1e-4));
  }
}

TEST_CASE("solver agrees with the grid oracle and equalises delays") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    int n = 2 + static_cast<int>(seed % 3);
    auto p = random_problem(seed, n);
    auto s = solve_beta(p);
    double grid = oracle::grid_minmax(p, 1e-3);
    // The exact optimum can only beat a lattice point; a 1e-3 lattice loses
    // up to about 1e-3 / beta_min in relative terms.
    CHECK(s.objective_s <= grid * (1 + 1e-9));
    CHECK(s.objective_s == doctest::Approx(grid).epsilon(1e-2));
    if (n == 2) CHECK(s.objective_s == doctest::Approx(oracle::grid_minmax(p, 1e-6)).epsilon(1e-6));
    double total = std::accumulate(s.beta.begin(), s.beta.end(), 0.0);
    CHECK(total <= 1.0 + 1e-9);
    CHECK(total >= 1.0 - 1e-6);
    for (double b : s.beta) {
      CHECK(b > 0.0);
      CHECK(b <= 1.0);
    }
    CHECK(verify_kkt(p, s));
    CHECK(s.objective_s == doctest::Approx(objective_for(p, s.beta)).epsilon(1e-12));
  }
}

TEST_CASE("feasibility is monotone in the delay target") {
  auto p = random_problem(77, 5);
  auto share = [&](double tau) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double slack = tau - p.comp_time_s[i];
      if (slack <= 0) return 1e300;
      total += std::min(1.0, p.bits[i] / (p.rate_coeff[i] * slack));
    }
    return total;
  };
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    double a = rng.uniform(0, 100), b = rng.uniform(0, 100);
    if (a > b) std::swap(a, b);
    CHECK(share(b) <= share(a));
  }
}

TEST_CASE("kkt check rejects a perturbed split") {
  auto p = random_problem(3, 3);
  auto s = solve_beta(p);
  REQUIRE(verify_kkt(p, s));
  auto bad = s;
  bad.beta[0] += 0.05;
  double total = std::accumulate(bad.beta.begin(), bad.beta.end(), 0.0);
  for (double& b : bad.beta) b /= total;
  bad.objective_s = objective_for(p, bad.beta);
  CHECK_FALSE(verify_kkt(p, bad));

  std::vector<double> grid_beta;
  auto p3 = random_problem(8, 3);
  oracle::grid_minmax(p3, 1e-3, &grid_beta);
  AllocSolution from_grid{grid_beta, {}, objective_for(p3, grid_beta), 0};
  CHECK(verify_kkt(p3, from_grid, 1e-2 * from_grid.objective_s / p3.global_iters));
}

TEST_CASE("uniform split is never better than the solver") {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    auto p = random_problem(seed, 4);
    auto u = uniform_split(p);
    for (double b : u.beta) CHECK(b == 0.25);
    CHECK(u.objective_s >= solve_beta(p).objective_s * (1 - 1e-12));
  }
  AllocProblem two;
  two.bits = {1, 2};
  two.rate_coeff = {1, 1};
  two.comp_time_s = {0, 0};
  CHECK(uniform_split(two).beta == std::vector<double>{0.5, 0.5});
}

TEST_CASE("step cap raises NonConvergence") {
  auto p = random_problem(4, 4);
  SolverOptions tight;
  tight.max_steps = 3;
  tight.tolerance_s = 1e-9;
  try {
    solve_beta(p, tight);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonConvergence);
  }
}

TEST_CASE("problems without a usable link are rejected") {
  AllocProblem p;
  p.bits = {1.0};
  p.rate_coeff = {0.0};
  p.comp_time_s = {1.0};
  CHECK_THROWS_AS(solve_beta(p), Error);
}

}  // TEST_SUITE
