// Copyright 2026 The pihlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pihlab/pihlab.h"

#include <algorithm>
#include <charconv>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "pihlab/dynamics.hpp"
#include "pihlab/envsim.hpp"
#include "pihlab/error.hpp"
#include "pihlab/presets.hpp"
#include "pihlab/run_config.hpp"
#include "pihlab/runner.hpp"

struct pih_env {
  pihlab::PegInHoleEnv env;
};

struct pih_run {
  std::optional<pihlab::RunConfig> config;
  pihlab::FlagOverrides flags;
  pih_log_fn log = nullptr;
  void* log_user = nullptr;
  std::string summary = "{}";
  std::string config_text;
};

namespace {

thread_local std::string g_last_error;

pih_status fail(pih_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

pih_status status_of(pihlab::ErrorKind kind) {
  switch (kind) {
    case pihlab::ErrorKind::kUsage: return PIH_ERR_USAGE;
    case pihlab::ErrorKind::kNumeric: return PIH_ERR_NUMERIC;
    case pihlab::ErrorKind::kInvalidGain: return PIH_ERR_INVALID_GAIN;
    case pihlab::ErrorKind::kIo: return PIH_ERR_IO;
  }
  return PIH_ERR_INTERNAL;
}

template <typename F>
pih_status guarded(F&& body) {
  try {
    body();
    return PIH_OK;
  } catch (const pihlab::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PIH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PIH_ERR_INTERNAL, e.what());
  }
}

void fill(const pihlab::EnvState& s, pih_env_state* out) {
  if (!out) return;
  for (int i = 0; i < 3; ++i) {
    out->x[i] = s.x(i);
    out->v[i] = s.v(i);
    out->f[i] = s.f(i);
  }
  out->t = s.t;
  out->done = s.done ? 1 : 0;
  out->success = s.success ? 1 : 0;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    pihlab::throw_usage("invalid value '" + text + "' for " + key);
  }
  return value;
}

pihlab::RunConfig resolved(pih_run* run, const std::string& command) {
  const auto names = pihlab::command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    pihlab::throw_usage("unknown command '" + command + "'");
  }
  pihlab::RunConfig c = run->config.value_or(pihlab::RunConfig{});
  pihlab::apply_overrides(c, command, run->flags);
  return c;
}

}  // namespace

extern "C" {

const char* pih_version(void) { return "0.1.0"; }

const char* pih_status_name(pih_status status) {
  switch (status) {
    case PIH_OK: return "ok";
    case PIH_ERR_USAGE: return "usage";
    case PIH_ERR_NUMERIC: return "numeric";
    case PIH_ERR_INVALID_GAIN: return "invalid_gain";
    case PIH_ERR_IO: return "io";
    case PIH_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pih_last_error(void) { return g_last_error.c_str(); }

pih_status pih_derive_damping(const double* inertia, const double* stiffness,
                              size_t n, double* damping_out) {
  if (!inertia || !stiffness || !damping_out) {
    return fail(PIH_ERR_USAGE, "pih_derive_damping: null argument");
  }
  return guarded([&] {
    const auto count = static_cast<Eigen::Index>(n);
    const pihlab::Vector d = pihlab::derive_damping(
        Eigen::Map<const pihlab::Vector>(inertia, count),
        Eigen::Map<const pihlab::Vector>(stiffness, count));
    for (Eigen::Index i = 0; i < count; ++i) damping_out[i] = d(i);
  });
}

pih_status pih_env_create(const char* preset_or_path, pih_env** out) {
  if (!preset_or_path || !out) return fail(PIH_ERR_USAGE, "pih_env_create: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new pih_env{pihlab::PegInHoleEnv(pihlab::load_env_config(preset_or_path))};
  });
}

void pih_env_destroy(pih_env* env) { delete env; }

pih_status pih_env_reset(pih_env* env, uint64_t seed, pih_env_state* state_out) {
  if (!env) return fail(PIH_ERR_USAGE, "pih_env_reset: null environment");
  return guarded([&] { fill(env->env.reset(seed), state_out); });
}

pih_status pih_env_step(pih_env* env, const double dx[3], const double k[3],
                        pih_env_state* state_out, double* reward_out) {
  if (!env || !dx || !k) return fail(PIH_ERR_USAGE, "pih_env_step: null argument");
  return guarded([&] {
    pihlab::Action a;
    a.dx = pihlab::Vec3(dx[0], dx[1], dx[2]);
    a.k = pihlab::Vec3(k[0], k[1], k[2]);
    const auto r = env->env.step(a);
    fill(r.state, state_out);
    if (reward_out) *reward_out = r.reward;
  });
}

pih_status pih_run_create(const char* config_path, pih_run** out) {
  if (!out) return fail(PIH_ERR_USAGE, "pih_run_create: null output");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<pih_run>();
    if (config_path && *config_path) run->config = pihlab::load_run_config(config_path);
    *out = run.release();
  });
}

void pih_run_destroy(pih_run* run) { delete run; }

pih_status pih_run_set_flag(pih_run* run, const char* key, const char* value) {
  if (!run || !key || !value) return fail(PIH_ERR_USAGE, "pih_run_set_flag: null argument");
  return guarded([&] {
    const std::string k = key;
    const std::string v = value;
    auto& f = run->flags;
    if (k == "seed") f.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "episodes") f.episodes = parse_number<int>(k, v);
    else if (k == "steps") f.steps = parse_number<std::int64_t>(k, v);
    else if (k == "preset") f.presets = pihlab::split_list(v);
    else if (k == "policies") f.policies = pihlab::split_list(v);
    else if (k == "out") f.out = v;
    else pihlab::throw_usage("unknown flag '" + k + "'");
  });
}

pih_status pih_run_set_logger(pih_run* run, pih_log_fn fn, void* user) {
  if (!run) return fail(PIH_ERR_USAGE, "pih_run_set_logger: null run");
  run->log = fn;
  run->log_user = user;
  return PIH_OK;
}

const char* pih_run_config_json(pih_run* run, const char* command) {
  if (!run || !command) {
    fail(PIH_ERR_USAGE, "pih_run_config_json: null argument");
    return nullptr;
  }
  const pih_status s = guarded([&] {
    run->config_text = pihlab::run_config_to_json(resolved(run, command)).dump(2);
  });
  return s == PIH_OK ? run->config_text.c_str() : nullptr;
}

pih_status pih_run_execute(pih_run* run, const char* command) {
  if (!run || !command) return fail(PIH_ERR_USAGE, "pih_run_execute: null argument");
  return guarded([&] {
    const pihlab::RunConfig c = resolved(run, command);
    pihlab::LogSink sink;
    if (run->log) {
      sink = [run](const std::string& line) { run->log(line.c_str(), run->log_user); };
    }
    const auto outcome = pihlab::run_command(command, c, sink);
    run->summary = outcome.summary.dump();
  });
}

const char* pih_run_summary(const pih_run* run) {
  return run ? run->summary.c_str() : "{}";
}

}  // extern "C"
