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

namespace edgedem::stats {

double mean(std::span<const double> xs);
// Sample standard deviation; 0 for fewer than two values.
double stddev(std::span<const double> xs);

// Average ranks, 1-based; ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> xs);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n - 2 dof
};

Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace edgedem::stats
