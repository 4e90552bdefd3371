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

// Planar peg-in-hole environment. Generalized coordinates are (x, z, theta)
// of the peg's bottom-center point; z = 0 is the receptacle surface and the
// hole floor sits at z = -hole_depth. The peg is held by an admittance
// controller whose compliant pose is tracked exactly by the robot.

#ifndef PIHLAB_ENVSIM_HPP_
#define PIHLAB_ENVSIM_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pihlab/dynamics.hpp"

namespace pihlab {

inline constexpr int kPlanarDof = 3;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct EnvParams {
  double contact_stiffness = 5e4;  // N/m per contact point
  double contact_damping = 100.0;  // N s/m
  double friction_mu = 0.3;
  double force_scale = 1.0;       // applied to the reported wrench only
  double sensor_noise_std = 0.0;  // N, added to the reported wrench
  // Torque noise is sensor_noise_std times this lever arm, m.
  double noise_lever = 0.02;
  double friction_vreg = 1e-3;    // m/s, tanh regularization of Coulomb
  double max_penetration = 5e-3;  // deeper penetration is clamped

  void validate() const;
};

struct Geometry {
  double peg_width = 0.040;
  double peg_height = 0.060;
  double hole_width = 0.0403;
  double hole_depth = 0.015;
  double hole_center_x = 0.0;

  double clearance() const { return hole_width - peg_width; }
  void validate() const;
};

// Half-widths of the uniform ranges sampled at reset.
struct RandomizationConfig {
  double peg_x = 1.5e-3;
  double peg_z = 1.0e-3;
  double peg_theta = 5e-3;
  double hole_x = 1.0e-3;

  void validate() const;
};

struct ActionBounds {
  Vec3 dx_max{2e-3, 2e-3, 0.02};
  double k_min = 10.0;
  double k_max = 1000.0;
};

struct EnvConfig {
  std::string name = "train_nominal";
  Geometry geometry;
  EnvParams params;
  RandomizationConfig randomization;
  ActionBounds bounds;
  Vec3 start_pose{0.0, 5e-3, 0.0};
  int max_steps = 100;
  int substeps = 25;
  double dt = 0.002;
  double success_depth_tol = 1e-3;
  // Lateral success tolerance is max(|clearance|, this floor).
  double min_lateral_tol = 1e-4;

  void validate() const;
};

struct EnvState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 f = Vec3::Zero();  // reported: force_scale * true + noise
  int t = 0;
  bool done = false;
  bool success = false;
};

struct Action {
  Vec3 dx = Vec3::Zero();
  Vec3 k = Vec3::Constant(500.0);
};

struct ContactPoint {
  Vec2 point;     // application point on the peg, world frame
  Vec2 normal;    // direction of the normal force acting on the peg
  double penetration = 0.0;
  double normal_force = 0.0;
  double friction_force = 0.0;  // signed, along (-normal_z, normal_x)
};

struct ContactEvaluation {
  Wrench wrench;
  // Diagonal of d(wrench)/d(velocity), used for the implicit friction and
  // contact-damping treatment during integration.
  Vector velocity_slope;
  std::vector<ContactPoint> contacts;
};

ContactEvaluation evaluate_contacts(const Pose& x, const Twist& v,
                                    const Geometry& geom,
                                    const EnvParams& params);

// True physical penalty wrench about the peg's bottom-center point.
Wrench contact_wrench(const Pose& x, const Twist& v, const Geometry& geom,
                      const EnvParams& params);

class PegInHoleEnv {
 public:
  explicit PegInHoleEnv(EnvConfig config);

  EnvState reset(std::uint64_t seed);
  EnvState reset(std::uint64_t seed, const RandomizationConfig& rand);

  struct StepResult {
    EnvState state;
    double reward = 0.0;
  };
  StepResult step(const Action& action);

  Action clamp(const Action& action) const;
  double reward_at(const Vec3& x) const;
  bool is_success(const Vec3& x) const;

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  const Geometry& geometry() const { return geom_; }
  Vec3 target() const;
  Vec3 desired_pose() const { return x_d_; }
  Vec3 true_wrench() const { return true_f_; }
  bool is_reset() const { return reset_; }

 private:
  Vec3 report(const Vec3& true_f);

  EnvConfig config_;
  Geometry geom_;
  AdmittanceState adm_;
  Vec3 x_d_ = Vec3::Zero();
  Vec3 true_f_ = Vec3::Zero();
  EnvState state_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  bool reset_ = false;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0);

}  // namespace pihlab

#endif  // PIHLAB_ENVSIM_HPP_
