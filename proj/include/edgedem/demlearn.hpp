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

#include "edgedem/data.hpp"
#include "edgedem/model.hpp"
#include "edgedem/rng.hpp"
#include "json.hpp"

namespace edgedem::learn {

enum class Regularizer { kNone, kL1, kL2 };

// (1/D) sum of cross-entropies + eta * R(w). Adds the gradient when grad is
// non-empty.
double local_loss(const Classifier& model, std::span<const double> w, const data::Dataset& data,
                  double eta, Regularizer reg, std::span<double> grad = {});

// Two-level hierarchy: UEs (level 0), groups (level 1), the regional root
// (level 2). Level-0 groups are singletons, so N_g^(0) = 1.
struct GroupTree {
  std::vector<int> group_of;           // level-1 group of each UE
  int num_groups = 0;
  std::vector<Weights> personal;       // level 0
  std::vector<Weights> group_models;   // level 1
  Weights regional;                    // level 2

  int num_ues() const { return static_cast<int>(group_of.size()); }
  // N_g^(1) for every group.
  std::vector<int> group_sizes() const;
  std::vector<std::vector<int>> members() const;
  bool has_ancestors() const { return !group_models.empty() && !regional.empty(); }
  // Groups partition the UEs and none is empty; throws EmptyGroup.
  void validate() const;
};

// J_n^(0)(w) + eta * sum_k (1/N^(k)) ||w - w^(k)||^2 over the group and
// regional ancestors of the UE.
double personalized_objective(const Classifier& model, std::span<const double> w,
                              const data::Dataset& data, const GroupTree& tree, int ue, double eta,
                              Regularizer reg = Regularizer::kNone, std::span<double> grad = {});

struct TrainConfig {
  double learning_rate = 1e-4;
  double eta = 1e-3;
  int tau = 1;  // rounds between learning phases
  int local_epochs = 1;
  int batch_size = 16;
  int rounds = 30;
  Regularizer regularizer = Regularizer::kNone;

  void validate() const;
};

// Mini-batch SGD on the personalized objective. Without ancestors (first
// round, FedAvg) only the data loss is optimized.
Weights local_train(const Classifier& model, std::span<const double> w, const data::Dataset& data,
                    const GroupTree* tree, int ue, const TrainConfig& config, Rng& rng);

// Refreshes group and regional models from the level-0 models.
void hierarchical_average(GroupTree& tree);

// Member-weight sums of each group seen by one aggregation point.
struct PartialSum {
  int group = 0;
  Weights sum;
  int count = 0;
};

// Partial in-group sums for the members served by `point` (an SBS index or
// the virtual node).
std::vector<PartialSum> partial_group_aggregate(int point, std::span<const int> serving,
                                                const GroupTree& tree);

// Completes the averaging at the MBS from the partial sums of all points.
void combine_partials(std::span<const std::vector<PartialSum>> partials, GroupTree& tree);

// Regional objective for reporting: sum_i (N_i/N) (J_i(w_i) + eta/2 ||w_i - w||^2)
// where group_data[i] holds the pooled training data of group i.
double regional_objective(const Classifier& model, const GroupTree& tree,
                          std::span<const data::Dataset> group_data, double eta);

enum class Linkage { kSingle, kComplete, kAverage };

struct Merge {
  int left = 0;   // cluster ids: UEs are 0..N-1, merge k creates N + k
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Clustering {
  std::vector<int> group_of;
  int num_groups = 0;
  std::vector<Merge> dendrogram;  // all N - 1 merges

  nlohmann::json to_json() const;
};

// Agglomerative clustering on Euclidean distance, cut to n_groups. Ties go to
// the pair with the lowest member index; group ids follow the lowest member.
Clustering recluster(std::span<const Weights> features, int n_groups, Linkage linkage);

// sum_n (D_n / sum D) w_n.
Weights fedavg_round(std::span<const Weights> models, std::span<const double> data_sizes);

double mean_pairwise_distance(std::span<const Weights> models);

}  // namespace edgedem::learn
