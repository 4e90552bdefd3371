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

#include "pihlab/trajectory.hpp"

#include <string>

#include "pihlab/error.hpp"

namespace pihlab {

double Trajectory::episode_return() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.r;
  return total;
}

void Trajectory::validate() const {
  if (steps.empty()) throw_usage("trajectory has no steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].r > 0.0) {
      throw_usage("trajectory step " + std::to_string(i) +
                  " has a positive reward");
    }
  }
}

}  // namespace pihlab
