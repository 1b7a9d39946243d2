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
#include <string>
#include <vector>

#include "edgedem/alloc.hpp"
#include "edgedem/data.hpp"
#include "edgedem/demlearn.hpp"
#include "edgedem/latency.hpp"
#include "edgedem/radio.hpp"
#include "json.hpp"

namespace edgedem {

enum class MatchingScheme { kProposal, kRandom, kUniform, kOneSided, kOptimal };
enum class LearningScheme { kDemLearn, kFedAvg, kNone };
enum class ClusterFeatures { kWeights, kWeightsAndGrads };
enum class DataSource { kSynthetic, kIdx };

const char* to_string(MatchingScheme s);
const char* to_string(LearningScheme s);
MatchingScheme parse_matching_scheme(const std::string& name);
LearningScheme parse_learning_scheme(const std::string& name);

struct NetworkSettings {
  int num_ues = 50;
  int num_sbs = 5;
  std::vector<int> quotas;        // empty: sub-bands per SBS
  double virtual_rate_bps = 0.0;  // <= 0: one RB at the median SINR
};

struct MatchingSettings {
  MatchingScheme scheme = MatchingScheme::kProposal;
  int preference_refresh = 1;  // rounds between preference rebuilds
};

struct LearningSettings {
  LearningScheme scheme = LearningScheme::kDemLearn;
  learn::ModelKind model = learn::ModelKind::kLogistic;
  int hidden = 32;
  learn::TrainConfig train;
  int num_groups = 3;
  learn::Linkage linkage = learn::Linkage::kAverage;
  ClusterFeatures cluster_features = ClusterFeatures::kWeights;
  double init_scale = 0.5;
};

struct DataSettings {
  DataSource source = DataSource::kSynthetic;
  data::SynthConfig synth;
  data::PartitionSpec partition;  // seed is taken from the replication
  std::string idx_images;
  std::string idx_labels;
  std::string idx_test_images;  // optional held-out archive
  std::string idx_test_labels;
};

struct RunSettings {
  std::uint64_t seed = 1;
  int replications = 10;
  int workers = 0;  // 0: hardware concurrency
  bool trace_matching = false;
  std::vector<int> sweep_ues{10, 20, 30, 40, 50};
  std::vector<int> sweep_sbs{2, 3, 5};
  std::vector<std::string> sweep_schemes{"proposal", "random"};
  std::vector<int> bench_ues{10, 20, 30, 40, 50, 60};
  int bench_sbs = 5;
  int bench_instances = 10;
  std::vector<int> snapshot_rounds;  // empty: every round
};

struct ExperimentConfig {
  radio::RadioConfig radio;
  NetworkSettings network;
  latency::LearningBudget budget;
  latency::ProfileConfig compute;
  alloc::SolverOptions alloc;
  MatchingSettings matching;
  LearningSettings learning;
  DataSettings data;
  RunSettings run;

  void validate() const;
};

// Layered configuration document. Every key has a default; overrides must
// name an existing key and keep its JSON type.
class ConfigDocument {
 public:
  ConfigDocument();

  static ConfigDocument from_file(const std::string& path);
  static ConfigDocument from_text(const std::string& text);

  // Deep-merges a partial document; unknown keys raise InvalidConfig.
  void merge(const nlohmann::json& overrides);
  // "section.key" set from a JSON literal; bare words are taken as strings.
  void set(const std::string& dotted_key, const std::string& value);
  // Applies EDGEDEM_<SECTION>_<KEY> variables from the environment.
  void apply_env(char** environ_ptr);

  const nlohmann::json& json() const { return doc_; }
  ExperimentConfig build() const;

 private:
  nlohmann::json doc_;
};

nlohmann::json default_config_json();

}  // namespace edgedem
