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

#include <span>
#include <vector>

#include "edgedem/latency.hpp"

namespace edgedem::alloc {

// Bandwidth-sharing problem of one SBS for a fixed set of members.
struct AllocProblem {
  std::vector<int> ues;             // member UE ids, for reporting
  std::vector<double> bits;         // model upload size d_n in bits
  std::vector<double> rate_coeff;   // bits/s at beta = 1
  std::vector<double> comp_time_s;  // t_comp at the chosen frequency
  std::vector<double> cpu_freq_hz;  // frequency behind comp_time_s
  int global_iters = 1;

  std::size_t size() const { return bits.size(); }
  void validate() const;
};

struct AllocSolution {
  std::vector<double> beta;
  std::vector<double> cpu_freq_hz;
  double objective_s = 0.0;  // T_s^global
  int iterations = 0;
};

struct SolverOptions {
  double tolerance_s = 1e-6;
  int max_steps = 200;
};

// Smallest admissible bandwidth share.
inline constexpr double kMinBeta = 1e-9;

// Latency-only objective: every UE runs at its maximum frequency.
std::vector<double> optimal_freq(std::span<const latency::UeComputeProfile> profiles);

// Per-iteration delay of member i under share beta.
double member_delay(const AllocProblem& problem, std::size_t i, double beta);

// T_s^global for an arbitrary share vector.
double objective_for(const AllocProblem& problem, std::span<const double> beta);

// Min-max bandwidth split by bisection on the common per-iteration delay.
AllocSolution solve_beta(const AllocProblem& problem, const SolverOptions& options = {});

// Budget tight and all uncapped members equalised within tol seconds.
bool verify_kkt(const AllocProblem& problem, const AllocSolution& solution,
                double tol = 1e-6);

// Equal share for every member.
AllocSolution uniform_split(const AllocProblem& problem);

}  // namespace edgedem::alloc
