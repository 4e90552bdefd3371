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

// Diagonal admittance control:
//
//   M (x_c'' - x_d'') + D (x_c' - x_d') + K (x_c - x_d) = f
//
// with M, K, D positive diagonal and D = 4 sqrt(M K) (damping ratio 2).

#ifndef PIHLAB_DYNAMICS_HPP_
#define PIHLAB_DYNAMICS_HPP_

#include <Eigen/Dense>

namespace pihlab {

using Vector = Eigen::VectorXd;

// Generalized coordinates (m, rad).
struct Pose {
  Vector q;
};

// Generalized velocities (m/s, rad/s).
struct Twist {
  Vector v;
};

// Generalized forces (N, N m).
struct Wrench {
  Vector f;
};

// Per-axis damping that makes each axis overdamped with ratio 2.
// Throws Error(kInvalidGain) if any entry of m or k is not strictly positive.
Vector derive_damping(const Vector& m, const Vector& k);

// Diagonal inertia / stiffness / damping. Damping is always derived, never
// set independently, so d_i == 4 sqrt(m_i k_i) holds bitwise.
class GainSet {
 public:
  GainSet(Vector inertia, Vector stiffness);

  // Unit inertia on every axis; the environments keep M fixed.
  static GainSet with_unit_inertia(const Vector& stiffness);

  const Vector& inertia() const { return inertia_; }
  const Vector& stiffness() const { return stiffness_; }
  const Vector& damping() const { return damping_; }
  Eigen::Index dof() const { return inertia_.size(); }

 private:
  Vector inertia_;
  Vector stiffness_;
  Vector damping_;
};

struct AdmittanceState {
  Pose x_c;
  Twist v_c;
};

struct DesiredMotion {
  Pose x_d;
  Twist v_d;
  Vector a_d;
};

// Static setpoint: zero desired velocity and acceleration.
DesiredMotion setpoint(const Pose& x_d);

// One semi-implicit Euler step (velocity first, then position).
// Throws Error(kNumeric) on non-finite input and Error(kUsage) on dt <= 0 or
// dimension mismatch.
AdmittanceState admittance_step(const AdmittanceState& state,
                                const DesiredMotion& desired, const Wrench& f,
                                const GainSet& gains, double dt);

// Same step, with the velocity-dependent part of f treated implicitly.
// force_velocity_slope holds the diagonal of df/dv (<= 0 for dissipative
// contact); with a zero slope this is bitwise identical to the plain step.
AdmittanceState admittance_step(const AdmittanceState& state,
                                const DesiredMotion& desired, const Wrench& f,
                                const GainSet& gains, double dt,
                                const Vector& force_velocity_slope);

}  // namespace pihlab

#endif  // PIHLAB_DYNAMICS_HPP_
