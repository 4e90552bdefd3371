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

#include "pihlab/datagen.hpp"

#include <algorithm>
#include <iostream>
#include <string>

#include "pihlab/error.hpp"

namespace pihlab {

void AugmentConfig::validate() const {
  if (!(scale_min > 0.0) || !(scale_max >= scale_min)) {
    throw_usage("augmentation scale range must satisfy 0 < min <= max");
  }
  if (!(noise_std >= 0.0) || !(noise_lever >= 0.0)) {
    throw_usage("augmentation noise must be >= 0");
  }
  if (copies < 0) throw_usage("augmentation copies must be >= 0");
}

Trajectory augment_force(const Trajectory& traj, double scale,
                         std::span<const Vec3> noise) {
  if (noise.size() != traj.size()) {
    throw_usage("augment_force: one noise vector per step required");
  }
  Trajectory out = traj;
  for (std::size_t t = 0; t < out.size(); ++t) {
    out.steps[t].f = scale * traj.steps[t].f + noise[t];
  }
  return out;
}

Trajectory augment_force(const Trajectory& traj, std::mt19937_64& rng,
                         const AugmentConfig& config) {
  config.validate();
  std::uniform_real_distribution<double> scale_dist(config.scale_min,
                                                    config.scale_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = scale_dist(rng);
  std::vector<Vec3> noise(traj.size());
  for (auto& n : noise) {
    n[0] = config.noise_std * gauss(rng);
    n[1] = config.noise_std * gauss(rng);
    n[2] = config.noise_std * config.noise_lever * gauss(rng);
  }
  return augment_force(traj, scale, noise);
}

std::vector<double> returns_to_go(std::span<const double> rewards) {
  if (rewards.empty()) throw_usage("returns_to_go: empty reward sequence");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc += rewards[i];
    out[i] = acc;
  }
  return out;
}

std::vector<double> rewards_of(const Trajectory& traj) {
  std::vector<double> r;
  r.reserve(traj.size());
  for (const auto& s : traj.steps) r.push_back(s.r);
  return r;
}

template <typename Slot>
int Window<Slot>::valid_count() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), 1));
}
template struct Window<GtSlot>;
template struct Window<FpSlot>;

bool operator==(const GtSlot& a, const GtSlot& b) {
  return a.x == b.x && a.v == b.v && a.dx == b.dx && a.k == b.k &&
         a.f_next == b.f_next;
}

bool operator==(const FpSlot& a, const FpSlot& b) {
  return a.x == b.x && a.v == b.v && a.f == b.f && a.dx == b.dx &&
         a.f_next == b.f_next && a.rtg == b.rtg;
}

WindowPair build_windows(const Trajectory& traj,
                         std::span<const double> returns, int t, int window) {
  const int n = static_cast<int>(traj.size());
  if (window < 1) throw_usage("build_windows: window must be >= 1");
  if (t < 0 || t >= n) {
    throw_usage("build_windows: t=" + std::to_string(t) +
                " outside [0, " + std::to_string(n) + ")");
  }
  if (static_cast<int>(returns.size()) < t) {
    throw_usage("build_windows: returns shorter than the window span");
  }
  WindowPair w;
  w.gt.slots.assign(window, GtSlot{});
  w.gt.valid.assign(window, 0);
  w.fp.slots.assign(window, FpSlot{});
  w.fp.valid.assign(window, 0);
  for (int j = 0; j < window; ++j) {
    const int i = t - window + j;
    if (i < 0) continue;
    const Step& s = traj.steps[i];
    const Vec3& f_next = traj.steps[i + 1].f;
    w.gt.slots[j] = GtSlot{s.x, s.v, s.dx, s.k, f_next};
    w.fp.slots[j] = FpSlot{s.x, s.v, s.f, s.dx, f_next, returns[i]};
    w.gt.valid[j] = 1;
    w.fp.valid[j] = 1;
  }
  return w;
}

Dataset::Dataset(std::vector<Trajectory> trajectories)
    : trajs_(std::move(trajectories)) {
  rtg_.reserve(trajs_.size());
  for (std::size_t i = 0; i < trajs_.size(); ++i) {
    const auto& tr = trajs_[i];
    tr.validate();
    rtg_.push_back(returns_to_go(rewards_of(tr)));
    if (tr.size() < 2) {
      ++skipped_;
      std::cerr << "warning: skipping trajectory " << i << " (seed " << tr.seed
                << "): length " << tr.size() << " has no next-force target\n";
      continue;
    }
    for (std::size_t t = 0; t + 1 < tr.size(); ++t) {
      index_.emplace_back(static_cast<std::uint32_t>(i),
                          static_cast<std::uint32_t>(t));
    }
  }
}

DatasetRow Dataset::row_head(std::size_t i) const {
  if (i >= index_.size()) throw_usage("dataset row index out of range");
  const auto [ti, t] = index_[i];
  const Trajectory& tr = trajs_[ti];
  const Step& s = tr.steps[t];
  DatasetRow row;
  row.trajectory = ti;
  row.t = static_cast<int>(t);
  row.x = s.x;
  row.v = s.v;
  row.f = s.f;
  row.dx = s.dx;
  row.k = s.k;
  row.f_next = tr.steps[t + 1].f;
  row.rtg = rtg_[ti][t];
  return row;
}

DatasetRow Dataset::row(std::size_t i, int window) const {
  DatasetRow r = row_head(i);
  auto w = build_windows(trajs_[r.trajectory], rtg_[r.trajectory], r.t, window);
  r.gt = std::move(w.gt);
  r.fp = std::move(w.fp);
  return r;
}

double Dataset::best_return() const {
  if (trajs_.empty()) throw_usage("best_return: dataset is empty");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rtg_) best = std::max(best, r.front());
  return best;
}

Dataset build_dataset(std::vector<Trajectory> trajectories) {
  return Dataset(std::move(trajectories));
}

std::vector<Trajectory> augment_all(const std::vector<Trajectory>& raw,
                                    const AugmentConfig& config,
                                    std::uint64_t seed) {
  config.validate();
  std::vector<Trajectory> out;
  out.reserve(raw.size() * (1 + config.copies));
  std::mt19937_64 rng(mix_seed(seed, 0x6175676dULL));
  for (const auto& tr : raw) {
    out.push_back(tr);
    for (int c = 0; c < config.copies; ++c) {
      out.push_back(augment_force(tr, rng, config));
    }
  }
  return out;
}

}  // namespace pihlab
