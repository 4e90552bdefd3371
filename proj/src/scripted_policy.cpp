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

#include "pihlab/scripted_policy.hpp"

#include <algorithm>
#include <cmath>

#include "pihlab/error.hpp"

namespace pihlab {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(std::mt19937_64& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

constexpr double kPegHalfWidth = 0.020;
constexpr double kMinSearchStep = 0.05e-3;

}  // namespace

PhaseMemory begin_episode(std::mt19937_64& rng,
                          const ScriptedPolicyConfig& config) {
  PhaseMemory m;
  m.degraded = uniform(rng, 0.0, 1.0) < config.failure_rate;
  for (int i = 0; i < kPlanarDof; ++i) {
    m.k_base[i] = log_uniform(rng, config.k_min, config.k_max);
  }
  m.force_target =
      uniform(rng, config.force_target_min, config.force_target_max);
  m.descent_speed = uniform(rng, 0.8e-3, 1.6e-3);
  m.search_step = uniform(rng, 0.3e-3, 0.6e-3);
  if (m.degraded) {
    // Pushes far harder than needed with a stiff controller.
    m.force_target *= 3.0;
    m.k_base *= 1.5;
  }
  m.prev_k = m.k_base;
  return m;
}

Action scripted_policy(const EnvState& state, PhaseMemory& m,
                       std::mt19937_64& rng,
                       const ScriptedPolicyConfig& config) {
  const auto& b = config.bounds;
  Action a;
  for (int i = 0; i < kPlanarDof; ++i) {
    const double jitter = std::exp(config.gain_jitter[i] * gaussian(rng));
    a.k[i] = std::clamp(m.k_base[i] * jitter, b.k_min * 1.05, b.k_max * 0.95);
  }
  const double fz = state.f[1];
  const double tau = state.f[2];

  if (m.phase == Phase::kDescend) {
    if (state.x[1] < -config.drop_depth) {
      m.phase = Phase::kInsert;
      m.steps_in_phase = 0;
    } else if (fz > config.contact_threshold) {
      m.phase = Phase::kSearch;
      m.steps_in_phase = 0;
    }
  } else if (m.phase == Phase::kSearch && state.x[1] < -config.drop_depth) {
    m.phase = Phase::kInsert;
    m.steps_in_phase = 0;
  }

  // Displacement that brings the normal force to `target` under the new gain.
  auto regulate_z = [&](double target) {
    const double deflection = std::max(fz, 0.0) / m.prev_k[1];
    return -(target / a.k[1] - deflection);
  };

  switch (m.phase) {
    case Phase::kDescend: {
      a.dx[0] = config.motion_noise * gaussian(rng);
      a.dx[1] = -m.descent_speed;
      a.dx[2] = -0.5 * state.x[2];
      break;
    }
    case Phase::kSearch: {
      a.dx[1] = regulate_z(m.force_target);
      const double tau_threshold = 0.2 * std::max(fz, 0.0) * kPegHalfWidth;
      double s = std::abs(tau) > tau_threshold ? sign(tau) : 0.0;
      if (m.degraded) s = sign(gaussian(rng));
      if (s != 0.0) {
        if (m.last_torque_sign != 0.0 && s != m.last_torque_sign) {
          m.search_step = std::max(0.5 * m.search_step, kMinSearchStep);
        }
        m.last_torque_sign = s;
        // Support on the +x corner means the opening is toward -x.
        a.dx[0] = -s * m.search_step;
      }
      a.dx[0] += config.motion_noise * gaussian(rng);
      a.dx[2] = -0.5 * state.x[2];
      break;
    }
    case Phase::kInsert: {
      const double push = -m.descent_speed;
      a.dx[1] = std::max(push, regulate_z(2.0 * m.force_target));
      a.dx[0] = 0.5 * state.f[0] / a.k[0] +
                config.motion_noise * gaussian(rng);
      a.dx[2] = -0.5 * state.x[2] + 0.5 * state.f[2] / a.k[2];
      break;
    }
  }
  ++m.steps_in_phase;
  for (int i = 0; i < kPlanarDof; ++i) {
    a.dx[i] = std::clamp(a.dx[i], -0.95 * b.dx_max[i], 0.95 * b.dx_max[i]);
  }
  m.prev_k = a.k;
  return a;
}

std::mt19937_64 policy_rng(std::uint64_t episode_seed) {
  return std::mt19937_64(mix_seed(episode_seed, 0x706f6c696379ULL));
}

Trajectory collect_episode(PegInHoleEnv& env,
                           const ScriptedPolicyConfig& config,
                           std::uint64_t seed) {
  Trajectory traj;
  traj.seed = seed;
  traj.preset = env.config().name;
  traj.policy_version = "scripted-v1";
  std::mt19937_64 rng = policy_rng(seed);
  PhaseMemory memory = begin_episode(rng, config);
  EnvState s = env.reset(seed);
  while (!s.done) {
    const Action a = env.clamp(scripted_policy(s, memory, rng, config));
    const auto result = env.step(a);
    traj.steps.push_back(Step{s.x, s.v, s.f, a.dx, a.k, result.reward});
    s = result.state;
  }
  traj.success = s.success;
  return traj;
}

}  // namespace pihlab
