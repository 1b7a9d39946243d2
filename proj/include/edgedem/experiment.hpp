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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edgedem/config.hpp"
#include "edgedem/error.hpp"
#include "json.hpp"

namespace edgedem::experiment {

inline constexpr int kSchemaVersion = 1;

// One row of rounds.csv. Learning metrics are NaN when no model exists
// (learning scheme "none").
struct RoundRecord {
  int replication = 0;
  int round = 0;  // 1-based
  MatchingScheme matching = MatchingScheme::kProposal;
  LearningScheme learning = LearningScheme::kDemLearn;
  double system_delay_ms = 0.0;
  double cumulative_delay_ms = 0.0;
  int swaps = 0;
  std::vector<double> sbs_delays_ms;  // per SBS, then the virtual node
  double regional_acc = 0.0;
  double specialization_mean = 0.0;
  double generalization_mean = 0.0;
  double mean_pairwise_distance = 0.0;
};

struct ReplicationResult {
  int replication = 0;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  std::vector<nlohmann::json> trace;           // one object per round
  std::vector<nlohmann::json> matching_trace;  // swap events, when traced
  std::vector<nlohmann::json> clusters;        // dendrogram snapshots
  nlohmann::json manifest;                     // data partition
  std::optional<ErrorCode> error;              // replication aborted
  std::string error_message;
};

struct ExperimentResult {
  std::vector<ReplicationResult> replications;  // ordered by index
  bool ok() const;
};

// Replication r runs on seed + r.
std::uint64_t replication_seed(std::uint64_t base, int replication);

// Runs jobs 0..count-1 on up to `workers` threads (0: hardware concurrency).
// The first exception is rethrown after every thread has joined.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

// Module errors abort only this replication and are recorded in the result.
ReplicationResult run_replication(const ExperimentConfig& config, int replication);

ExperimentResult run_experiment(const ExperimentConfig& config);

const std::string& rounds_csv_header();
std::string format_round(const RoundRecord& record);

// Means and sample deviations across replications, plus per-round curves.
nlohmann::json summarize(const ExperimentConfig& config, const ExperimentResult& result);

// rounds.csv, trace.jsonl, matching_trace.jsonl (when traced), clusters.jsonl
// (DemLearn), manifest.json and summary.json under out_dir.
void emit_results(const ExperimentConfig& config, const ExperimentResult& result,
                  const std::filesystem::path& out_dir);

struct SweepCell {
  std::string scheme;
  int num_ues = 0;
  int num_sbs = 0;
  int replications = 0;
  int failed = 0;
  double mean_delay_ms = 0.0;  // mean over replications of the per-round mean
  double std_delay_ms = 0.0;
  double mean_total_delay_ms = 0.0;
  double mean_swaps = 0.0;
};

// Grid over schemes x UEs x SBSs, in that row-major order. Cells measure
// delay only, so the learning phase is skipped.
std::vector<SweepCell> sweep(const ExperimentConfig& config);
void emit_sweep(const ExperimentConfig& config, const std::vector<SweepCell>& cells,
                const std::filesystem::path& out_dir);

struct BenchRow {
  int num_ues = 0;
  int num_sbs = 0;
  int instance = 0;
  std::uint64_t seed = 0;
  int swaps = 0;
  double system_delay_ms = 0.0;
  double wall_seconds = 0.0;
};

struct BenchFit {
  // Smallest c with swaps <= c * N * S * ln(N * S) on every row.
  double c = 0.0;
  std::vector<int> num_ues;
  std::vector<double> mean_swaps;
  std::vector<int> max_swaps;
};

// Proposal matching from the RSRP association on fresh instances.
std::vector<BenchRow> matching_bench(const ExperimentConfig& config);
BenchFit fit_swap_scaling(const std::vector<BenchRow>& rows);
void emit_bench(const std::vector<BenchRow>& rows, const std::filesystem::path& out_dir);

// Runs one DemLearn replication and writes its cluster snapshots.
ReplicationResult cluster_snapshot(const ExperimentConfig& config, int replication,
                                   const std::filesystem::path& out_dir);

}  // namespace edgedem::experiment
