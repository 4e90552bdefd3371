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

// Scripted stochastic insertion policy used to collect the offline dataset.
//
// Three phases: descend in free space until contact, then a torque-guided
// lateral search under a regulated normal force, then push-in once the peg
// drops below the surface. Gains, force targets and exploration noise are
// randomized per episode, and a fraction of episodes runs a degraded variant
// so that the recorded returns are diverse.

#ifndef PIHLAB_SCRIPTED_POLICY_HPP_
#define PIHLAB_SCRIPTED_POLICY_HPP_

#include <cstdint>
#include <random>

#include "pihlab/envsim.hpp"
#include "pihlab/trajectory.hpp"

namespace pihlab {

struct ScriptedPolicyConfig {
  double contact_threshold = 1.5;  // N, |f_z| that ends the descent
  double drop_depth = 0.6e-3;      // m below the surface that ends the search
  double failure_rate = 0.25;      // fraction of degraded episodes
  double force_target_min = 3.0;   // N, regulated normal force range
  double force_target_max = 12.0;
  double k_min = 150.0;  // per-episode base gain range, N/m
  double k_max = 900.0;
  // Relative per-step gain perturbation, log-normal, per axis.
  Vec3 gain_jitter{0.05, 0.25, 0.05};
  double motion_noise = 0.1e-3;
  ActionBounds bounds;
};

enum class Phase { kDescend = 0, kSearch = 1, kInsert = 2 };

struct PhaseMemory {
  Phase phase = Phase::kDescend;
  bool degraded = false;
  Vec3 k_base = Vec3::Constant(500.0);
  double force_target = 6.0;
  double descent_speed = 1.5e-3;
  double search_step = 0.4e-3;
  double last_torque_sign = 0.0;
  Vec3 prev_k = Vec3::Constant(500.0);
  int steps_in_phase = 0;
};

// Samples the per-episode parameters.
PhaseMemory begin_episode(std::mt19937_64& rng,
                          const ScriptedPolicyConfig& config);

Action scripted_policy(const EnvState& state, PhaseMemory& memory,
                       std::mt19937_64& rng,
                       const ScriptedPolicyConfig& config);

// Policy RNG stream derived from an episode seed; independent of the
// environment's stream.
std::mt19937_64 policy_rng(std::uint64_t episode_seed);

// Runs one scripted episode from reset(seed) to termination.
Trajectory collect_episode(PegInHoleEnv& env,
                           const ScriptedPolicyConfig& config,
                           std::uint64_t seed);

}  // namespace pihlab

#endif  // PIHLAB_SCRIPTED_POLICY_HPP_
