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

#include "pihlab/dynamics.hpp"

#include <cmath>
#include <string>

#include "pihlab/error.hpp"

namespace pihlab {
namespace {

void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite()) {
    throw_numeric(std::string("admittance_step: non-finite ") + name);
  }
}

void require_dim(const Vector& v, Eigen::Index d, const char* name) {
  if (v.size() != d) {
    throw_usage(std::string("admittance_step: ") + name + " has dimension " +
                std::to_string(v.size()) + ", expected " + std::to_string(d));
  }
}

}  // namespace

Vector derive_damping(const Vector& m, const Vector& k) {
  if (m.size() != k.size() || m.size() < 1) {
    throw_usage("derive_damping: inertia and stiffness must be non-empty and "
                "the same size");
  }
  Vector d(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    // Negated comparisons also reject NaN.
    if (!(m[i] > 0.0) || !(k[i] > 0.0) || !std::isfinite(m[i]) ||
        !std::isfinite(k[i])) {
      throw Error(ErrorKind::kInvalidGain,
                  "derive_damping: axis " + std::to_string(i) +
                      " has non-positive inertia or stiffness");
    }
    d[i] = 4.0 * std::sqrt(m[i] * k[i]);
  }
  return d;
}

GainSet::GainSet(Vector inertia, Vector stiffness)
    : inertia_(std::move(inertia)), stiffness_(std::move(stiffness)) {
  damping_ = derive_damping(inertia_, stiffness_);
}

GainSet GainSet::with_unit_inertia(const Vector& stiffness) {
  return GainSet(Vector::Ones(stiffness.size()), stiffness);
}

DesiredMotion setpoint(const Pose& x_d) {
  const auto d = x_d.q.size();
  return DesiredMotion{x_d, Twist{Vector::Zero(d)}, Vector::Zero(d)};
}

AdmittanceState admittance_step(const AdmittanceState& state,
                                const DesiredMotion& desired, const Wrench& f,
                                const GainSet& gains, double dt) {
  return admittance_step(state, desired, f, gains, dt,
                         Vector::Zero(gains.dof()));
}

AdmittanceState admittance_step(const AdmittanceState& state,
                                const DesiredMotion& desired, const Wrench& f,
                                const GainSet& gains, double dt,
                                const Vector& force_velocity_slope) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw_usage("admittance_step: dt must be positive and finite");
  }
  const Eigen::Index d = gains.dof();
  require_dim(state.x_c.q, d, "x_c");
  require_dim(state.v_c.v, d, "v_c");
  require_dim(desired.x_d.q, d, "x_d");
  require_dim(desired.v_d.v, d, "v_d");
  require_dim(desired.a_d, d, "a_d");
  require_dim(f.f, d, "f");
  require_dim(force_velocity_slope, d, "force_velocity_slope");
  require_finite(state.x_c.q, "x_c");
  require_finite(state.v_c.v, "v_c");
  require_finite(desired.x_d.q, "x_d");
  require_finite(desired.v_d.v, "v_d");
  require_finite(desired.a_d, "a_d");
  require_finite(f.f, "f");
  require_finite(force_velocity_slope, "force_velocity_slope");

  const Vector& m = gains.inertia();
  const Vector& k = gains.stiffness();
  const Vector& c = gains.damping();

  AdmittanceState next{Pose{Vector(d)}, Twist{Vector(d)}};
  for (Eigen::Index i = 0; i < d; ++i) {
    const double x = state.x_c.q[i];
    const double v = state.v_c.v[i];
    const double accel =
        desired.a_d[i] + (f.f[i] - c[i] * (v - desired.v_d.v[i]) -
                          k[i] * (x - desired.x_d.q[i])) /
                             m[i];
    double dv = dt * accel;
    if (force_velocity_slope[i] != 0.0) {
      dv /= 1.0 - dt * force_velocity_slope[i] / m[i];
    }
    next.v_c.v[i] = v + dv;
    next.x_c.q[i] = x + dt * next.v_c.v[i];
  }
  return next;
}

}  // namespace pihlab
