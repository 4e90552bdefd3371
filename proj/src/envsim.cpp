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

#include "pihlab/envsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pihlab/error.hpp"

namespace pihlab {
namespace {

constexpr double kFarField = 1.0;  // extent of the receptacle surface, m

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Receptacle boundary, traversed left to right with the solid below.
std::array<Segment, 5> receptacle_boundary(const Geometry& g) {
  const double hw = 0.5 * g.hole_width;
  const double l = g.hole_center_x - hw;
  const double r = g.hole_center_x + hw;
  const double floor = -g.hole_depth;
  return {{{Vec2(l - kFarField, 0.0), Vec2(l, 0.0)},
           {Vec2(l, 0.0), Vec2(l, floor)},
           {Vec2(l, floor), Vec2(r, floor)},
           {Vec2(r, floor), Vec2(r, 0.0)},
           {Vec2(r, 0.0), Vec2(r + kFarField, 0.0)}}};
}

bool inside_receptacle(const Vec2& p, const Geometry& g) {
  if (std::abs(p.x() - g.hole_center_x) < 0.5 * g.hole_width) {
    return p.y() < -g.hole_depth;
  }
  return p.y() < 0.0;
}

Vec2 closest_on_segment(const Vec2& p, const Segment& s) {
  const Vec2 ab = s.b - s.a;
  const double t = std::clamp((p - s.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return s.a + t * ab;
}

Vec2 outward_normal(const Segment& s) {
  // Solid lies to the right of the traversal direction.
  const Vec2 ab = (s.b - s.a).normalized();
  return Vec2(-ab.y(), ab.x());
}

Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  r << c, -s, s, c;
  return r;
}

// Candidate contact before the force law is applied.
struct Penetration {
  Vec2 point;
  Vec2 normal;
  double depth;
};

void add_contact(const Penetration& pen, const Vec3& q, const Vec3& qd,
                 const EnvParams& params, ContactEvaluation& out) {
  const double depth = std::min(pen.depth, params.max_penetration);
  const Vec2 r = pen.point - q.head<2>();
  // Generalized-velocity Jacobian of the peg material point at pen.point.
  Eigen::Matrix<double, 2, 3> jac;
  jac << 1.0, 0.0, -r.y(), 0.0, 1.0, r.x();
  const Vec2 point_vel = jac * qd;
  const Vec2 n = pen.normal;
  const Vec2 tangent(-n.y(), n.x());

  const double depth_rate = -n.dot(point_vel);
  const double raw = params.contact_stiffness * depth +
                     params.contact_damping * depth_rate;
  const double fn = std::max(0.0, raw);
  const double vt = tangent.dot(point_vel);
  const double sat = std::tanh(vt / params.friction_vreg);
  const double ft = -params.friction_mu * fn * sat;

  const Vec2 force = fn * n + ft * tangent;
  out.wrench.f[0] += force.x();
  out.wrench.f[1] += force.y();
  out.wrench.f[2] += r.x() * force.y() - r.y() * force.x();

  if (fn > 0.0) {
    const Eigen::RowVector3d jn = n.transpose() * jac;
    const Eigen::RowVector3d jt = tangent.transpose() * jac;
    const double damping = raw > 0.0 ? params.contact_damping : 0.0;
    const double friction_slope =
        params.friction_mu * fn * (1.0 - sat * sat) / params.friction_vreg;
    for (int i = 0; i < kPlanarDof; ++i) {
      out.velocity_slope[i] -=
          damping * jn[i] * jn[i] + friction_slope * jt[i] * jt[i];
    }
  }
  out.contacts.push_back(ContactPoint{pen.point, n, depth, fn, ft});
}

}  // namespace

void EnvParams::validate() const {
  if (!(contact_stiffness > 0.0)) throw_usage("contact_stiffness must be > 0");
  if (!(contact_damping >= 0.0)) throw_usage("contact_damping must be >= 0");
  if (!(friction_mu >= 0.0)) throw_usage("friction_mu must be >= 0");
  if (!(force_scale > 0.0)) throw_usage("force_scale must be > 0");
  if (!(sensor_noise_std >= 0.0)) throw_usage("sensor_noise_std must be >= 0");
  if (!(friction_vreg > 0.0)) throw_usage("friction_vreg must be > 0");
  if (!(max_penetration > 0.0)) throw_usage("max_penetration must be > 0");
  if (!(noise_lever >= 0.0)) throw_usage("noise_lever must be >= 0");
}

void Geometry::validate() const {
  if (!(peg_width > 0.0)) throw_usage("peg_width must be > 0");
  if (!(peg_height > 0.0)) throw_usage("peg_height must be > 0");
  if (!(hole_width > 0.0)) throw_usage("hole_width must be > 0");
  if (!(hole_depth > 0.0)) throw_usage("hole_depth must be > 0");
  if (!std::isfinite(hole_center_x)) throw_usage("hole_center_x not finite");
}

void RandomizationConfig::validate() const {
  for (double r : {peg_x, peg_z, peg_theta, hole_x}) {
    if (!std::isfinite(r) || r < 0.0) {
      throw_usage("randomization ranges must be finite and >= 0");
    }
  }
}

void EnvConfig::validate() const {
  geometry.validate();
  params.validate();
  randomization.validate();
  if (!(bounds.k_min > 0.0) || !(bounds.k_max >= bounds.k_min)) {
    throw_usage("gain bounds must satisfy 0 < k_min <= k_max");
  }
  if (!((bounds.dx_max.array() > 0.0).all())) {
    throw_usage("motion bounds must be positive");
  }
  if (max_steps < 1 || substeps < 1 || !(dt > 0.0)) {
    throw_usage("max_steps, substeps and dt must be positive");
  }
  if (!start_pose.allFinite()) throw_usage("start_pose not finite");
}

ContactEvaluation evaluate_contacts(const Pose& x, const Twist& v,
                                    const Geometry& geom,
                                    const EnvParams& params) {
  if (x.q.size() != kPlanarDof || v.v.size() != kPlanarDof) {
    throw_usage("contact model is planar: expected 3 coordinates");
  }
  ContactEvaluation out{Wrench{Vector::Zero(kPlanarDof)},
                        Vector::Zero(kPlanarDof), {}};
  if (!x.q.allFinite() || !v.v.allFinite()) {
    throw_numeric("evaluate_contacts: non-finite pose or velocity");
  }
  const Vec3 q = x.q;
  const Vec3 qd = v.v;
  const Eigen::Matrix2d rot = rotation(q[2]);
  const double half = 0.5 * geom.peg_width;

  // Peg bottom corners against the receptacle.
  const auto boundary = receptacle_boundary(geom);
  for (double side : {-1.0, 1.0}) {
    const Vec2 corner = q.head<2>() + rot * Vec2(side * half, 0.0);
    if (!inside_receptacle(corner, geom)) continue;
    double best = std::numeric_limits<double>::infinity();
    Vec2 normal = Vec2::UnitY();
    for (const auto& seg : boundary) {
      const Vec2 c = closest_on_segment(corner, seg);
      const double dist = (c - corner).norm();
      if (dist < best) {
        best = dist;
        normal = dist > 1e-12 ? Vec2((c - corner) / dist) : outward_normal(seg);
      }
    }
    add_contact({corner, normal, best}, q, qd, params, out);
  }

  // Hole lip corners against the peg body.
  const double hw = 0.5 * geom.hole_width;
  for (double side : {-1.0, 1.0}) {
    const Vec2 lip(geom.hole_center_x + side * hw, 0.0);
    const Vec2 u = rot.transpose() * (lip - q.head<2>());
    if (!(u.x() > -half && u.x() < half && u.y() > 0.0 &&
          u.y() < geom.peg_height)) {
      continue;
    }
    // Peg face outward normals (peg frame) and distances.
    const std::array<std::pair<double, Vec2>, 3> faces{{
        {u.x() + half, Vec2(-1.0, 0.0)},
        {half - u.x(), Vec2(1.0, 0.0)},
        {u.y(), Vec2(0.0, -1.0)},
    }};
    const auto it = std::min_element(
        faces.begin(), faces.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    add_contact({lip, -(rot * it->second), it->first}, q, qd, params, out);
  }
  return out;
}

Wrench contact_wrench(const Pose& x, const Twist& v, const Geometry& geom,
                      const EnvParams& params) {
  return evaluate_contacts(x, v, geom, params).wrench;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PegInHoleEnv::PegInHoleEnv(EnvConfig config)
    : config_(std::move(config)), geom_(config_.geometry) {
  config_.validate();
}

EnvState PegInHoleEnv::reset(std::uint64_t seed) {
  return reset(seed, config_.randomization);
}

EnvState PegInHoleEnv::reset(std::uint64_t seed,
                             const RandomizationConfig& rand) {
  rand.validate();
  rng_.seed(mix_seed(seed));
  noise_.reset();
  auto uniform = [this](double half_range) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return half_range * u(rng_);
  };
  geom_ = config_.geometry;
  Vec3 start = config_.start_pose;
  // Draw order is part of the determinism contract.
  start[0] += uniform(rand.peg_x);
  start[1] += uniform(rand.peg_z);
  start[2] += uniform(rand.peg_theta);
  geom_.hole_center_x += uniform(rand.hole_x);

  adm_ = AdmittanceState{Pose{start}, Twist{Vector::Zero(kPlanarDof)}};
  x_d_ = start;
  true_f_ = contact_wrench(adm_.x_c, adm_.v_c, geom_, config_.params).f;
  state_ = EnvState{};
  state_.x = start;
  state_.v = Vec3::Zero();
  state_.f = report(true_f_);
  state_.success = is_success(start);
  reset_ = true;
  return state_;
}

Action PegInHoleEnv::clamp(const Action& action) const {
  Action out;
  const auto& b = config_.bounds;
  for (int i = 0; i < kPlanarDof; ++i) {
    out.dx[i] = std::clamp(action.dx[i], -b.dx_max[i], b.dx_max[i]);
    out.k[i] = std::clamp(action.k[i], b.k_min, b.k_max);
  }
  return out;
}

Vec3 PegInHoleEnv::target() const {
  return Vec3(geom_.hole_center_x, -geom_.hole_depth, 0.0);
}

double PegInHoleEnv::reward_at(const Vec3& x) const {
  return -(x.head<2>() - target().head<2>()).norm();
}

bool PegInHoleEnv::is_success(const Vec3& x) const {
  const double lateral_tol =
      std::max(std::abs(geom_.clearance()), config_.min_lateral_tol);
  return x[1] <= -geom_.hole_depth + config_.success_depth_tol &&
         std::abs(x[0] - geom_.hole_center_x) < lateral_tol;
}

Vec3 PegInHoleEnv::report(const Vec3& true_f) {
  Vec3 out = config_.params.force_scale * true_f;
  // Noise is always drawn so the noise stream stays aligned across presets.
  const double std_force = config_.params.sensor_noise_std;
  out[0] += std_force * noise_(rng_);
  out[1] += std_force * noise_(rng_);
  out[2] += std_force * config_.params.noise_lever * noise_(rng_);
  return out;
}

PegInHoleEnv::StepResult PegInHoleEnv::step(const Action& action) {
  if (!reset_) throw_usage("step: environment has not been reset");
  if (state_.done) throw_usage("step: episode is done; call reset");
  if (!action.dx.allFinite() || !action.k.allFinite()) {
    throw_numeric("step: non-finite action");
  }
  const Action a = clamp(action);
  x_d_ += a.dx;
  const GainSet gains = GainSet::with_unit_inertia(a.k);
  const DesiredMotion desired = setpoint(Pose{x_d_});
  for (int s = 0; s < config_.substeps; ++s) {
    const ContactEvaluation contact =
        evaluate_contacts(adm_.x_c, adm_.v_c, geom_, config_.params);
    adm_ = admittance_step(adm_, desired, contact.wrench, gains, config_.dt,
                           contact.velocity_slope);
  }
  if (!adm_.x_c.q.allFinite() || !adm_.v_c.v.allFinite()) {
    throw_numeric("step: integration diverged");
  }
  true_f_ = contact_wrench(adm_.x_c, adm_.v_c, geom_, config_.params).f;

  state_.x = adm_.x_c.q;
  state_.v = adm_.v_c.v;
  state_.f = report(true_f_);
  state_.t += 1;
  state_.success = is_success(state_.x);
  state_.done = state_.success || state_.t >= config_.max_steps;
  return StepResult{state_, reward_at(state_.x)};
}

}  // namespace pihlab
