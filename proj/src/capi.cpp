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

#include "edgedem/edgedem.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "edgedem/config.hpp"
#include "edgedem/experiment.hpp"
#include "edgedem/matching.hpp"

extern char** environ;

struct edgedem_config {
  edgedem::ConfigDocument doc;
  std::string dump;
};

struct edgedem_network {
  edgedem::matching::MatchingContext ctx;
};

namespace {

thread_local std::string g_last_error;

edgedem_status fail(edgedem_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body and maps exceptions onto status codes.
template <class F>
edgedem_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const edgedem::Error& e) {
    return fail(static_cast<edgedem_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EDGEDEM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EDGEDEM_INTERNAL, e.what());
  }
}

#define EDGEDEM_REQUIRE(cond, what) \
  if (!(cond)) return fail(EDGEDEM_INVALID_ARGUMENT, what)

edgedem_status finish(const edgedem::experiment::ExperimentResult& result) {
  for (const auto& rep : result.replications)
    if (rep.error)
      return fail(EDGEDEM_PARTIAL_FAILURE,
                  "replication " + std::to_string(rep.replication) + " failed: " + rep.error_message);
  return EDGEDEM_OK;
}

}  // namespace

extern "C" {

const char* edgedem_version(void) { return "1.0.0"; }

const char* edgedem_status_name(edgedem_status status) {
  if (status == EDGEDEM_PARTIAL_FAILURE) return "PartialFailure";
  if (status < EDGEDEM_OK || status > EDGEDEM_INTERNAL) return "Unknown";
  return edgedem::to_string(static_cast<edgedem::ErrorCode>(status));
}

const char* edgedem_last_error(void) { return g_last_error.c_str(); }

edgedem_status edgedem_config_new(edgedem_config** out) {
  EDGEDEM_REQUIRE(out, "out is null");
  return guarded([&] {
    *out = new edgedem_config{};
    return EDGEDEM_OK;
  });
}

void edgedem_config_free(edgedem_config* config) { delete config; }

edgedem_status edgedem_config_load_file(edgedem_config* config, const char* path) {
  EDGEDEM_REQUIRE(config && path, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) return fail(EDGEDEM_IO_ERROR, std::string("cannot read config file ") + path);
    auto parsed = nlohmann::json::parse(in, nullptr, false, true);
    if (parsed.is_discarded()) return fail(EDGEDEM_INVALID_CONFIG, std::string(path) + " is not valid JSON");
    config->doc.merge(parsed);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_config_merge_json(edgedem_config* config, const char* json_text) {
  EDGEDEM_REQUIRE(config && json_text, "null argument");
  return guarded([&] {
    auto parsed = nlohmann::json::parse(json_text, nullptr, false, true);
    if (parsed.is_discarded()) return fail(EDGEDEM_INVALID_CONFIG, "config text is not valid JSON");
    config->doc.merge(parsed);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_config_apply_env(edgedem_config* config) {
  EDGEDEM_REQUIRE(config, "config is null");
  return guarded([&] {
    config->doc.apply_env(environ);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_config_set(edgedem_config* config, const char* key, const char* value) {
  EDGEDEM_REQUIRE(config && key && value, "null argument");
  return guarded([&] {
    config->doc.set(key, value);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_config_validate(const edgedem_config* config) {
  EDGEDEM_REQUIRE(config, "config is null");
  return guarded([&] {
    config->doc.build();
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_config_dump(edgedem_config* config, const char** out_json) {
  EDGEDEM_REQUIRE(config && out_json, "null argument");
  return guarded([&] {
    config->dump = config->doc.json().dump(2);
    *out_json = config->dump.c_str();
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_run(const edgedem_config* config, const char* out_dir) {
  EDGEDEM_REQUIRE(config && out_dir, "null argument");
  return guarded([&] {
    auto cfg = config->doc.build();
    auto result = edgedem::experiment::run_experiment(cfg);
    edgedem::experiment::emit_results(cfg, result, out_dir);
    return finish(result);
  });
}

edgedem_status edgedem_sweep(const edgedem_config* config, const char* out_dir) {
  EDGEDEM_REQUIRE(config && out_dir, "null argument");
  return guarded([&] {
    auto cfg = config->doc.build();
    auto cells = edgedem::experiment::sweep(cfg);
    edgedem::experiment::emit_sweep(cfg, cells, out_dir);
    for (const auto& c : cells)
      if (c.failed > 0)
        return fail(EDGEDEM_PARTIAL_FAILURE, std::to_string(c.failed) + " replication(s) failed in cell " +
                                                 c.scheme + " N=" + std::to_string(c.num_ues) +
                                                 " S=" + std::to_string(c.num_sbs));
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_matching_bench(const edgedem_config* config, const char* out_dir) {
  EDGEDEM_REQUIRE(config && out_dir, "null argument");
  return guarded([&] {
    auto cfg = config->doc.build();
    edgedem::experiment::emit_bench(edgedem::experiment::matching_bench(cfg), out_dir);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_cluster_snapshot(const edgedem_config* config, int replication, const char* out_dir) {
  EDGEDEM_REQUIRE(config && out_dir, "null argument");
  EDGEDEM_REQUIRE(replication >= 0, "replication must be non-negative");
  return guarded([&] {
    edgedem::experiment::cluster_snapshot(config->doc.build(), replication, out_dir);
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_network_new(const edgedem_config* config, uint64_t seed, edgedem_network** out) {
  EDGEDEM_REQUIRE(config && out, "null argument");
  return guarded([&] {
    auto cfg = config->doc.build();
    auto net = edgedem::radio::generate_topology(cfg.radio, cfg.network.num_ues, cfg.network.num_sbs, seed);
    auto profiles = edgedem::latency::generate_profiles(cfg.compute, cfg.network.num_ues, seed);
    auto handle = std::make_unique<edgedem_network>();
    handle->ctx = edgedem::matching::make_context(net, cfg.radio, profiles, cfg.budget, cfg.network.quotas,
                                                  cfg.alloc, cfg.network.virtual_rate_bps);
    *out = handle.release();
    return EDGEDEM_OK;
  });
}

void edgedem_network_free(edgedem_network* network) { delete network; }

edgedem_status edgedem_network_size(const edgedem_network* network, int* num_ues, int* num_sbs) {
  EDGEDEM_REQUIRE(network, "network is null");
  if (num_ues) *num_ues = network->ctx.num_ues();
  if (num_sbs) *num_sbs = network->ctx.num_sbs();
  return EDGEDEM_OK;
}

edgedem_status edgedem_network_match(edgedem_network* network, int* serving, size_t serving_len,
                                     double* system_delay_s, int* swaps) {
  EDGEDEM_REQUIRE(network, "network is null");
  EDGEDEM_REQUIRE(!serving || serving_len >= static_cast<size_t>(network->ctx.num_ues()),
                  "serving buffer too small");
  return guarded([&] {
    auto result = edgedem::matching::run_matching(network->ctx);
    if (serving)
      std::memcpy(serving, result.evaluation.matching.assignment.data(),
                  result.evaluation.matching.assignment.size() * sizeof(int));
    if (system_delay_s) *system_delay_s = result.evaluation.system_delay_s;
    if (swaps) *swaps = result.stats.swaps;
    return EDGEDEM_OK;
  });
}

edgedem_status edgedem_network_evaluate(const edgedem_network* network, const int* serving, size_t serving_len,
                                        double* system_delay_s) {
  EDGEDEM_REQUIRE(network && serving && system_delay_s, "null argument");
  EDGEDEM_REQUIRE(serving_len == static_cast<size_t>(network->ctx.num_ues()), "serving length must equal num_ues");
  return guarded([&] {
    edgedem::matching::Matching m{std::vector<int>(serving, serving + serving_len), network->ctx.quotas};
    if (!m.is_valid()) return fail(EDGEDEM_INVALID_ARGUMENT, "association violates indices or quotas");
    *system_delay_s = edgedem::matching::evaluate(network->ctx, m).system_delay_s;
    return EDGEDEM_OK;
  });
}

}  // extern "C"
