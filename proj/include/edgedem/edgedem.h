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

#ifndef EDGEDEM_EDGEDEM_H
#define EDGEDEM_EDGEDEM_H

/* C interface of the edgedem simulator. Every call returns a status code;
 * on failure edgedem_last_error() describes the problem for the calling
 * thread. Handles are opaque and must be released with their _free call. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EDGEDEM_API __declspec(dllexport)
#else
#define EDGEDEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum edgedem_status {
  EDGEDEM_OK = 0,
  EDGEDEM_INVALID_ARGUMENT = 1,
  EDGEDEM_EMPTY_NETWORK = 2,
  EDGEDEM_EMPTY_ASSIGNMENT = 3,
  EDGEDEM_INVALID_ACCURACY = 4,
  EDGEDEM_ZERO_RATE = 5,
  EDGEDEM_EMPTY_SBS = 6,
  EDGEDEM_UNASSIGNED_UE = 7,
  EDGEDEM_NON_CONVERGENCE = 8,
  EDGEDEM_TOO_LARGE = 9,
  EDGEDEM_EMPTY_DATASET = 10,
  EDGEDEM_MISSING_ANCESTOR = 11,
  EDGEDEM_DIVERGENCE = 12,
  EDGEDEM_EMPTY_GROUP = 13,
  EDGEDEM_INSUFFICIENT_SAMPLES = 14,
  EDGEDEM_BAD_MAGIC = 15,
  EDGEDEM_COUNT_MISMATCH = 16,
  EDGEDEM_TRUNCATED_FILE = 17,
  EDGEDEM_IO_ERROR = 18,
  EDGEDEM_INVALID_CONFIG = 19,
  EDGEDEM_INTERNAL = 20,
  /* The run finished and wrote its outputs, but some replications failed. */
  EDGEDEM_PARTIAL_FAILURE = 21
} edgedem_status;

typedef struct edgedem_config edgedem_config;
typedef struct edgedem_network edgedem_network;

EDGEDEM_API const char* edgedem_version(void);
EDGEDEM_API const char* edgedem_status_name(edgedem_status status);
/* Message of the last failing call on this thread; "" when none. */
EDGEDEM_API const char* edgedem_last_error(void);

/* Configuration: defaults, then file, then environment, then explicit sets. */
EDGEDEM_API edgedem_status edgedem_config_new(edgedem_config** out);
EDGEDEM_API void edgedem_config_free(edgedem_config* config);
EDGEDEM_API edgedem_status edgedem_config_load_file(edgedem_config* config, const char* path);
EDGEDEM_API edgedem_status edgedem_config_merge_json(edgedem_config* config, const char* json_text);
/* Applies EDGEDEM_<SECTION>_<KEY> variables of the process environment. */
EDGEDEM_API edgedem_status edgedem_config_apply_env(edgedem_config* config);
/* key is "section.key"; value is a JSON literal or a bare string. */
EDGEDEM_API edgedem_status edgedem_config_set(edgedem_config* config, const char* key, const char* value);
/* Checks that the document builds into a valid experiment. */
EDGEDEM_API edgedem_status edgedem_config_validate(const edgedem_config* config);
/* Effective configuration as JSON. The string stays valid until the next
 * call on the same handle. */
EDGEDEM_API edgedem_status edgedem_config_dump(edgedem_config* config, const char** out_json);

/* Experiment drivers. Outputs are written under out_dir, which is created
 * when missing. */
EDGEDEM_API edgedem_status edgedem_run(const edgedem_config* config, const char* out_dir);
EDGEDEM_API edgedem_status edgedem_sweep(const edgedem_config* config, const char* out_dir);
EDGEDEM_API edgedem_status edgedem_matching_bench(const edgedem_config* config, const char* out_dir);
EDGEDEM_API edgedem_status edgedem_cluster_snapshot(const edgedem_config* config, int replication,
                                                    const char* out_dir);

/* Single network instance built from the configuration. */
EDGEDEM_API edgedem_status edgedem_network_new(const edgedem_config* config, uint64_t seed,
                                               edgedem_network** out);
EDGEDEM_API void edgedem_network_free(edgedem_network* network);
EDGEDEM_API edgedem_status edgedem_network_size(const edgedem_network* network, int* num_ues, int* num_sbs);
/* Runs the swap-matching game from the RSRP association. serving receives
 * num_ues entries (SBS index, or -1 for the virtual node). */
EDGEDEM_API edgedem_status edgedem_network_match(edgedem_network* network, int* serving, size_t serving_len,
                                                 double* system_delay_s, int* swaps);
/* System delay of an explicit association under the optimal split. */
EDGEDEM_API edgedem_status edgedem_network_evaluate(const edgedem_network* network, const int* serving,
                                                    size_t serving_len, double* system_delay_s);

#ifdef __cplusplus
}
#endif

#endif
