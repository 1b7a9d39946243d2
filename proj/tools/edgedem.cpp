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

// Command-line front end. Talks to the simulator only through edgedem.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgedem/edgedem.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitPartial = 4;

struct ConfigHandle {
  edgedem_config* ptr = nullptr;
  ~ConfigHandle() { edgedem_config_free(ptr); }
};

int report(edgedem_status status, const char* what) {
  if (status == EDGEDEM_OK) return 0;
  std::fprintf(stderr, "edgedem: %s failed [%s]: %s\n", what, edgedem_status_name(status), edgedem_last_error());
  if (status == EDGEDEM_PARTIAL_FAILURE) return kExitPartial;
  if (status == EDGEDEM_INVALID_CONFIG || status == EDGEDEM_INVALID_ARGUMENT) return kExitConfig;
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge learning simulator: UE-SBS association matching with hierarchical federated learning.\n"
               "Configuration precedence: defaults < --config file < EDGEDEM_<SECTION>_<KEY> environment < --set < flags."};
  app.set_version_flag("--version", std::string(edgedem_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "out";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int replications = 0, workers = -1;
  bool trace_matching = false, print_config = false;

  app.add_option("--config", config_path, "JSON config file layered over the built-in defaults")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "base seed; replication r uses seed + r");
  auto* reps_opt =
      app.add_option("--replications", replications, "replications per run or sweep cell")->check(CLI::PositiveNumber);
  app.add_option("--workers", workers, "worker threads (0: one per core)")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", out_dir, "directory for result files (created if missing)")->capture_default_str();
  app.add_flag("--trace-matching", trace_matching, "write every approved swap to matching_trace.jsonl");
  app.add_option("--set", sets, "override one key, e.g. --set train.rounds=10 (repeatable)");
  app.add_flag("--print-config", print_config, "print the effective configuration before running");

  auto* run = app.add_subcommand("run", "run the configured experiment; writes rounds.csv, trace.jsonl, summary.json");
  auto* sweep = app.add_subcommand("sweep", "mean delay over experiment.sweep_ues x sweep_sbs per sweep scheme");
  auto* bench = app.add_subcommand("matching-bench", "swap counts and run time of the matching game versus N");
  auto* snapshot = app.add_subcommand("cluster-snapshot", "learning-group dendrograms of one replication");
  int snapshot_rep = 0;
  snapshot->add_option("--replication", snapshot_rep, "replication index to trace")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  ConfigHandle cfg;
  if (int rc = report(edgedem_config_new(&cfg.ptr), "config")) return rc;
  if (!config_path.empty())
    if (int rc = report(edgedem_config_load_file(cfg.ptr, config_path.c_str()), "loading --config")) return rc;
  if (int rc = report(edgedem_config_apply_env(cfg.ptr), "environment overrides")) return rc;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "edgedem: --set expects section.key=value, got '%s'\n", s.c_str());
      return kExitConfig;
    }
    auto key = s.substr(0, eq), value = s.substr(eq + 1);
    if (int rc = report(edgedem_config_set(cfg.ptr, key.c_str(), value.c_str()), ("--set " + key).c_str()))
      return rc;
  }
  if (*seed_opt)
    if (int rc = report(edgedem_config_set(cfg.ptr, "experiment.seed", std::to_string(seed).c_str()), "--seed"))
      return rc;
  if (*reps_opt)
    if (int rc = report(edgedem_config_set(cfg.ptr, "experiment.replications", std::to_string(replications).c_str()),
                        "--replications"))
      return rc;
  if (workers >= 0)
    if (int rc = report(edgedem_config_set(cfg.ptr, "experiment.workers", std::to_string(workers).c_str()), "--workers"))
      return rc;
  if (trace_matching)
    if (int rc = report(edgedem_config_set(cfg.ptr, "experiment.trace_matching", "true"), "--trace-matching"))
      return rc;
  if (int rc = report(edgedem_config_validate(cfg.ptr), "config validation")) return rc;

  if (print_config) {
    const char* text = nullptr;
    if (int rc = report(edgedem_config_dump(cfg.ptr, &text), "config dump")) return rc;
    std::printf("%s\n", text);
  }

  edgedem_status status = EDGEDEM_OK;
  const char* what = "";
  if (*run) {
    what = "run";
    status = edgedem_run(cfg.ptr, out_dir.c_str());
  } else if (*sweep) {
    what = "sweep";
    status = edgedem_sweep(cfg.ptr, out_dir.c_str());
  } else if (*bench) {
    what = "matching-bench";
    status = edgedem_matching_bench(cfg.ptr, out_dir.c_str());
  } else if (*snapshot) {
    what = "cluster-snapshot";
    status = edgedem_cluster_snapshot(cfg.ptr, snapshot_rep, out_dir.c_str());
  }
  if (int rc = report(status, what)) return rc;
  std::fprintf(stderr, "edgedem: %s finished, outputs in %s\n", what, out_dir.c_str());
  return 0;
}
