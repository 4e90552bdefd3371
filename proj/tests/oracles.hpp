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

// Independent oracles shared by the unit tests and the acceptance suite.

#ifndef PIHLAB_TESTS_ORACLES_HPP_
#define PIHLAB_TESTS_ORACLES_HPP_

#include <cstdint>
#include <vector>

#include "pihlab/datagen.hpp"
#include "pihlab/seqmodel.hpp"

namespace pihlab::oracle {

// Largest relative error between the analytic gradient of the summed head
// losses and central finite differences, over every parameter. Entries whose
// gradients are both below `floor` in magnitude are compared absolutely
// against it.
struct GradCheck {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  Eigen::Index checked = 0;
};
GradCheck finite_difference_check(const SeqModel& model, std::uint64_t seed,
                                  int batch = 4, double floor = 1e-7);

// Tiny configuration for gradient checks: width 8 everywhere, H = 3.
ModelConfig tiny_config(Backbone backbone);

// Synthetic trajectories with random states and a planted rule:
//   gain tuner:    k_t = c |f_{t+1}| per axis
//   force planner: f_{t+1} = A x_t + b
std::vector<Trajectory> planted_gain_data(int trajectories, int length,
                                          double c, std::uint64_t seed);
std::vector<Trajectory> planted_force_data(int trajectories, int length,
                                           const Eigen::Matrix3d& a,
                                           const Vec3& b, std::uint64_t seed);

// Held-out MSE of one head divided by the variance of its targets, pooled
// over the head's dimensions.
double relative_mse(const SeqModel& model, const Dataset& data,
                    std::span<const std::size_t> rows, int head);

// Repeated Adam updates on one fixed batch. Returns the summed head loss
// before the first and after the last update.
struct OverfitResult {
  double initial = 0.0;
  double final = 0.0;
};
OverfitResult overfit_single_batch(SeqModel& model,
                                   std::span<const DatasetRow> rows, int steps,
                                   double lr);

}  // namespace pihlab::oracle

#endif  // PIHLAB_TESTS_ORACLES_HPP_
