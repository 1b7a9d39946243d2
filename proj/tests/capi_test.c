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

/* Exercises the C interface from plain C. */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "edgedem/edgedem.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "capi_out";
  edgedem_config* cfg = NULL;
  edgedem_network* net = NULL;
  const char* dump = NULL;
  int serving[8], n = 0, s = 0, swaps = -1;
  double delay = 0.0, check = 0.0;

  EXPECT(strlen(edgedem_version()) > 0);
  EXPECT(strcmp(edgedem_status_name(EDGEDEM_TOO_LARGE), "TooLarge") == 0);
  EXPECT(strcmp(edgedem_status_name(EDGEDEM_PARTIAL_FAILURE), "PartialFailure") == 0);

  EXPECT(edgedem_config_new(NULL) == EDGEDEM_INVALID_ARGUMENT);
  EXPECT(edgedem_config_new(&cfg) == EDGEDEM_OK);
  EXPECT(edgedem_config_set(cfg, "network.num_uez", "3") == EDGEDEM_INVALID_CONFIG);
  EXPECT(strlen(edgedem_last_error()) > 0);
  EXPECT(edgedem_config_merge_json(cfg, "{broken") == EDGEDEM_INVALID_CONFIG);
  EXPECT(edgedem_config_load_file(cfg, "/nonexistent/edgedem.json") == EDGEDEM_IO_ERROR);

  EXPECT(edgedem_config_merge_json(cfg, "{\"network\": {\"num_ues\": 8, \"num_sbs\": 3}}") == EDGEDEM_OK);
  EXPECT(edgedem_config_set(cfg, "network.quotas", "[3, 3, 3]") == EDGEDEM_OK);
  EXPECT(edgedem_config_validate(cfg) == EDGEDEM_OK);
  EXPECT(edgedem_config_dump(cfg, &dump) == EDGEDEM_OK);
  EXPECT(dump != NULL && strstr(dump, "\"num_ues\": 8") != NULL);

  EXPECT(edgedem_network_new(cfg, 5, &net) == EDGEDEM_OK);
  EXPECT(edgedem_network_size(net, &n, &s) == EDGEDEM_OK);
  EXPECT(n == 8 && s == 3);
  EXPECT(edgedem_network_match(net, serving, 4, &delay, &swaps) == EDGEDEM_INVALID_ARGUMENT);
  EXPECT(edgedem_network_match(net, serving, 8, &delay, &swaps) == EDGEDEM_OK);
  EXPECT(delay > 0.0 && swaps >= 0);
  EXPECT(edgedem_network_evaluate(net, serving, 8, &check) == EDGEDEM_OK);
  EXPECT(check == delay);
  serving[0] = serving[1] = serving[2] = serving[3] = 0;
  EXPECT(edgedem_network_evaluate(net, serving, 8, &check) == EDGEDEM_INVALID_ARGUMENT);
  edgedem_network_free(net);

  /* A short delay-only run writes its files. */
  EXPECT(edgedem_config_merge_json(cfg, "{\"train\": {\"scheme\": \"none\", \"rounds\": 2},"
                                        " \"experiment\": {\"replications\": 2}}") == EDGEDEM_OK);
  EXPECT(edgedem_run(cfg, out_dir) == EDGEDEM_OK);
  {
    char path[1024];
    FILE* f;
    snprintf(path, sizeof path, "%s/rounds.csv", out_dir);
    f = fopen(path, "r");
    EXPECT(f != NULL);
    if (f) fclose(f);
  }
  EXPECT(edgedem_run(cfg, NULL) == EDGEDEM_INVALID_ARGUMENT);
  edgedem_config_free(cfg);
  edgedem_config_free(NULL);

  if (failures) fprintf(stderr, "%d C API check(s) failed\n", failures);
  else printf("C API checks passed\n");
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
