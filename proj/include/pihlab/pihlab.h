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

/* C interface to pihlab. Handles are opaque; every fallible call returns a
 * pih_status and leaves a message for pih_last_error() on failure. Strings
 * returned by the library stay valid until the next call on the same
 * handle (or, for pih_last_error, the next failing call on the thread). */

#ifndef PIHLAB_PIHLAB_H_
#define PIHLAB_PIHLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PIHLAB_BUILDING_LIBRARY)
#define PIH_API __attribute__((visibility("default")))
#else
#define PIH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pih_status {
  PIH_OK = 0,
  PIH_ERR_USAGE = 1,
  PIH_ERR_NUMERIC = 2,
  PIH_ERR_INVALID_GAIN = 3,
  PIH_ERR_IO = 4,
  PIH_ERR_INTERNAL = 5
} pih_status;

typedef struct pih_env pih_env;
typedef struct pih_run pih_run;

typedef struct pih_env_state {
  double x[3]; /* x, z, theta */
  double v[3];
  double f[3]; /* reported wrench: f_x, f_z, torque */
  int t;
  int done;
  int success;
} pih_env_state;

typedef void (*pih_log_fn)(const char* line, void* user);

PIH_API const char* pih_version(void);
PIH_API const char* pih_status_name(pih_status status);
PIH_API const char* pih_last_error(void);

/* d_i = 4 sqrt(m_i k_i). */
PIH_API pih_status pih_derive_damping(const double* inertia,
                                      const double* stiffness, size_t n,
                                      double* damping_out);

/* Environment from a preset name or an environment JSON file. */
PIH_API pih_status pih_env_create(const char* preset_or_path, pih_env** out);
PIH_API void pih_env_destroy(pih_env* env);
PIH_API pih_status pih_env_reset(pih_env* env, uint64_t seed,
                                 pih_env_state* state_out);
PIH_API pih_status pih_env_step(pih_env* env, const double dx[3],
                                const double k[3], pih_env_state* state_out,
                                double* reward_out);

/* A run: configuration (file or defaults) plus flag overrides. */
PIH_API pih_status pih_run_create(const char* config_path, pih_run** out);
PIH_API void pih_run_destroy(pih_run* run);
/* Keys: seed, episodes, steps, preset, policies, out. Applied per command
 * at execution time. */
PIH_API pih_status pih_run_set_flag(pih_run* run, const char* key,
                                    const char* value);
PIH_API pih_status pih_run_set_logger(pih_run* run, pih_log_fn fn,
                                      void* user);
/* Resolved configuration for `command` as JSON, or NULL on error. */
PIH_API const char* pih_run_config_json(pih_run* run, const char* command);
PIH_API pih_status pih_run_execute(pih_run* run, const char* command);
/* JSON summary of the last successful execute ("{}" before any). */
PIH_API const char* pih_run_summary(const pih_run* run);

#ifdef __cplusplus
}
#endif

#endif /* PIHLAB_PIHLAB_H_ */
