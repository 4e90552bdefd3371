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

// Recorded episodes.

#ifndef PIHLAB_TRAJECTORY_HPP_
#define PIHLAB_TRAJECTORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pihlab/envsim.hpp"

namespace pihlab {

// One decision step: the observed state, the action taken from it, and the
// reward received after the action.
struct Step {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 f = Vec3::Zero();
  Vec3 dx = Vec3::Zero();
  Vec3 k = Vec3::Zero();
  double r = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  bool success = false;
  std::uint64_t seed = 0;
  std::string preset;
  std::string policy_version;

  std::size_t size() const { return steps.size(); }
  double episode_return() const;
  // Throws Error(kUsage) when empty or when a reward is positive.
  void validate() const;
};

}  // namespace pihlab

#endif  // PIHLAB_TRAJECTORY_HPP_
