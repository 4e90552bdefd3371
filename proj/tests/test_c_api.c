/* Copyright 2026 The pihlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Exercises the C API from C: status codes, error text, environment
 * stepping and run configuration. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pihlab/pihlab.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static int lines = 0;
static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

int main(void) {
  EXPECT(strlen(pih_version()) > 0);
  EXPECT(strcmp(pih_status_name(PIH_ERR_INVALID_GAIN), "invalid_gain") == 0);

  double m[3] = {1.0, 4.0, 1.0}, k[3] = {400.0, 100.0, 1.0}, d[3] = {0, 0, 0};
  EXPECT(pih_derive_damping(m, k, 3, d) == PIH_OK);
  EXPECT(d[0] == 80.0 && d[1] == 80.0 && d[2] == 4.0);
  k[1] = -1.0;
  EXPECT(pih_derive_damping(m, k, 3, d) == PIH_ERR_INVALID_GAIN);
  EXPECT(strlen(pih_last_error()) > 0);
  EXPECT(pih_derive_damping(NULL, k, 3, d) == PIH_ERR_USAGE);

  pih_env* env = NULL;
  EXPECT(pih_env_create("no_such_preset", &env) == PIH_ERR_USAGE);
  EXPECT(env == NULL);
  EXPECT(pih_env_create("train_nominal", &env) == PIH_OK);
  pih_env_state s;
  const double dx[3] = {0.0, -0.002, 0.0}, kk[3] = {300.0, 300.0, 300.0};
  double reward = 1.0;
  EXPECT(pih_env_step(env, dx, kk, &s, &reward) == PIH_ERR_USAGE);
  EXPECT(pih_env_reset(env, 7, &s) == PIH_OK);
  EXPECT(s.t == 0 && !s.done);
  const double z0 = s.x[1];
  EXPECT(pih_env_step(env, dx, kk, &s, &reward) == PIH_OK);
  EXPECT(s.t == 1);
  EXPECT(s.x[1] < z0);
  EXPECT(reward < 0.0);
  const double bad_dx[3] = {NAN, 0.0, 0.0};
  EXPECT(pih_env_step(env, bad_dx, kk, &s, &reward) == PIH_ERR_NUMERIC);
  while (!s.done) EXPECT(pih_env_step(env, dx, kk, &s, &reward) == PIH_OK);
  EXPECT(pih_env_step(env, dx, kk, &s, &reward) == PIH_ERR_USAGE);
  pih_env_destroy(env);
  pih_env_destroy(NULL);

  pih_run* run = NULL;
  EXPECT(pih_run_create("/nonexistent/config.json", &run) == PIH_ERR_IO);
  EXPECT(pih_run_create(NULL, &run) == PIH_OK);
  EXPECT(strcmp(pih_run_summary(run), "{}") == 0);
  EXPECT(pih_run_set_flag(run, "episodes", "3") == PIH_OK);
  EXPECT(pih_run_set_flag(run, "episodes", "three") == PIH_ERR_USAGE);
  EXPECT(pih_run_set_flag(run, "colour", "red") == PIH_ERR_USAGE);
  const char* cfg = pih_run_config_json(run, "collect");
  EXPECT(cfg != NULL && strstr(cfg, "\"episodes\": 3") != NULL);
  EXPECT(pih_run_config_json(run, "dance") == NULL);
  EXPECT(pih_run_execute(run, "dance") == PIH_ERR_USAGE);

  EXPECT(pih_run_set_flag(run, "episodes", "0") == PIH_OK);
  EXPECT(pih_run_set_flag(run, "out", PIH_TEST_SCRATCH "/c_api_run") == PIH_OK);
  EXPECT(pih_run_set_logger(run, count_lines, &lines) == PIH_OK);
  EXPECT(pih_run_execute(run, "collect") == PIH_OK);
  EXPECT(lines > 0);
  EXPECT(strstr(pih_run_summary(run), "\"episodes\":0") != NULL);
  /* Training on an empty dataset is reported, not crashed on. */
  EXPECT(pih_run_execute(run, "train") == PIH_ERR_USAGE);
  EXPECT(pih_run_execute(run, "eval") == PIH_ERR_IO);
  EXPECT(strstr(pih_last_error(), "c_api_run") != NULL);
  pih_run_destroy(run);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("c api: all checks passed\n");
  return failures ? 1 : 0;
}
