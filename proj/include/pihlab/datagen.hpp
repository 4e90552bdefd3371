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

// Offline dataset construction: force augmentation, returns-to-go, and the
// fixed-length history windows consumed by the gain tuner and force planner.

#ifndef PIHLAB_DATAGEN_HPP_
#define PIHLAB_DATAGEN_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pihlab/trajectory.hpp"

namespace pihlab {

struct AugmentConfig {
  double scale_min = 0.4;
  double scale_max = 1.4;
  double noise_std = 1.0;     // N on force axes
  double noise_lever = 0.02;  // torque noise = noise_std * noise_lever
  int copies = 3;             // augmented copies per raw trajectory

  void validate() const;
};

// f_t <- s f_t + eps_t with one s per trajectory and i.i.d. eps per step and
// axis. Every other field is copied bitwise.
Trajectory augment_force(const Trajectory& traj, std::mt19937_64& rng,
                         const AugmentConfig& config);

// Deterministic variant with an explicit scale and per-step noise.
Trajectory augment_force(const Trajectory& traj, double scale,
                         std::span<const Vec3> noise);

// Undiscounted suffix sums. Throws Error(kUsage) on empty input.
std::vector<double> returns_to_go(std::span<const double> rewards);

std::vector<double> rewards_of(const Trajectory& traj);

// One slot of the gain-tuner history: (x_i, v_i, dx_i, k_i, f_{i+1}).
struct GtSlot {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 dx = Vec3::Zero();
  Vec3 k = Vec3::Zero();
  Vec3 f_next = Vec3::Zero();
};

// One slot of the force-planner history: (x_i, v_i, f_i, dx_i, f_{i+1}, R_i).
struct FpSlot {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 f = Vec3::Zero();
  Vec3 dx = Vec3::Zero();
  Vec3 f_next = Vec3::Zero();
  double rtg = 0.0;
};

// Slot j holds step t - H + j. Slots before the episode start are zero and
// marked invalid.
template <typename Slot>
struct Window {
  std::vector<Slot> slots;
  std::vector<std::uint8_t> valid;

  int size() const { return static_cast<int>(slots.size()); }
  int valid_count() const;
  bool operator==(const Window&) const = default;
};

using GtWindow = Window<GtSlot>;
using FpWindow = Window<FpSlot>;

bool operator==(const GtSlot& a, const GtSlot& b);
bool operator==(const FpSlot& a, const FpSlot& b);

struct WindowPair {
  GtWindow gt;
  FpWindow fp;
};

// Windows for decision step t over steps t-H .. t-1. The desired-force slot
// of step i holds the force observed at i+1, which must exist in `traj`
// (always true for i < t < size). `returns` supplies R_i per step.
WindowPair build_windows(const Trajectory& traj, std::span<const double> returns,
                         int t, int window);

struct DatasetRow {
  std::size_t trajectory = 0;
  int t = 0;
  Vec3 x, v, f, dx, k, f_next;
  double rtg = 0.0;
  GtWindow gt;
  FpWindow fp;
};

// Immutable after construction. Rows are (trajectory, t) pairs with
// 0 <= t <= T-2; windows are materialized on demand.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Trajectory> trajectories);

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  std::size_t skipped() const { return skipped_; }

  DatasetRow row(std::size_t i, int window) const;
  // Row fields without the windows.
  DatasetRow row_head(std::size_t i) const;

  const std::vector<Trajectory>& trajectories() const { return trajs_; }
  const std::vector<double>& returns(std::size_t traj) const {
    return rtg_[traj];
  }
  // Best (highest) undiscounted episode return in the dataset.
  double best_return() const;

 private:
  std::vector<Trajectory> trajs_;
  std::vector<std::vector<double>> rtg_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> index_;
  std::size_t skipped_ = 0;
};

// Length-1 trajectories are skipped with a warning on stderr.
Dataset build_dataset(std::vector<Trajectory> trajectories);

// 1 raw + config.copies augmented copies of each trajectory, seeded.
std::vector<Trajectory> augment_all(const std::vector<Trajectory>& raw,
                                    const AugmentConfig& config,
                                    std::uint64_t seed);

}  // namespace pihlab

#endif  // PIHLAB_DATAGEN_HPP_
