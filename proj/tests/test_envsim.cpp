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

#include <cmath>
#include <random>

#include "doctest.h"
#include "pihlab/envsim.hpp"
#include "pihlab/error.hpp"
#include "pihlab/presets.hpp"

using namespace pihlab;

namespace {

Pose pose(double x, double z, double theta) { return Pose{Vec3(x, z, theta)}; }
Twist still() { return Twist{Vector::Zero(3)}; }

EnvConfig quiet_config() {
  EnvConfig c = preset("train_nominal");
  c.params.sensor_noise_std = 0.0;
  c.params.force_scale = 1.0;
  return c;
}

}  // namespace

TEST_CASE("no penetration gives zero wrench") {
  const Geometry g;
  const EnvParams p;
  CHECK(contact_wrench(pose(0.0, 5e-3, 0.0), still(), g, p).f == Vector::Zero(3));
  CHECK(contact_wrench(pose(0.0, -5e-3, 0.0), still(), g, p).f == Vector::Zero(3));
}

TEST_CASE("centered floor penetration is symmetric") {
  const Geometry g;
  EnvParams p;
  p.friction_mu = 0.0;
  const double delta = 1e-4;
  const auto w = contact_wrench(pose(0.0, -g.hole_depth - delta, 0.0), still(), g, p);
  // Each bottom corner carries stiffness * delta.
  CHECK(w.f[0] == 0.0);
  CHECK(w.f[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.f[1] == doctest::Approx(2.0 * p.contact_stiffness * delta).epsilon(1e-12));
}

TEST_CASE("single-corner penetration matches the hand computation") {
  Geometry g;
  g.hole_width = 0.05;  // keep the walls and lips out of reach
  EnvParams p;
  p.contact_stiffness = 5e4;
  const double theta = -0.01;
  const double half = 0.5 * g.peg_width;
  // Right corner sits 1e-4 below the floor, left corner above it.
  const double z = -g.hole_depth - 1e-4 - half * std::sin(theta);
  const auto eval = evaluate_contacts(pose(0.0, z, theta), still(), g, p);
  REQUIRE(eval.contacts.size() == 1);
  CHECK(eval.contacts[0].penetration == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(eval.contacts[0].normal_force == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(eval.wrench.f[0] == doctest::Approx(0.0));
  CHECK(eval.wrench.f[1] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(eval.wrench.f[2] == doctest::Approx(5.0 * half * std::cos(theta)).epsilon(1e-9));
}

TEST_CASE("contact forces are repulsive and friction is bounded") {
  const Geometry g;
  const EnvParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> px(-3e-3, 3e-3), pz(-0.017, 1e-3),
      pth(-0.05, 0.05), vel(-0.05, 0.05);
  int contacts = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto eval = evaluate_contacts(pose(px(rng), pz(rng), pth(rng)),
                                        Twist{Vec3(vel(rng), vel(rng), vel(rng))}, g, p);
    for (const auto& c : eval.contacts) {
      ++contacts;
      CHECK(c.normal_force >= 0.0);
      CHECK(std::abs(c.friction_force) <= p.friction_mu * c.normal_force + 1e-12);
    }
    CHECK(eval.wrench.f.allFinite());
  }
  CHECK(contacts > 1000);
}

TEST_CASE("reward is negative distance to the hole floor center") {
  PegInHoleEnv env(quiet_config());
  env.reset(1, RandomizationConfig{0, 0, 0, 0});
  const Vec3 target = env.target();
  CHECK(env.reward_at(target) == 0.0);
  CHECK(env.reward_at(target + Vec3(0.003, 0.004, 0.3)) == doctest::Approx(-0.005).epsilon(1e-12));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK(env.reward_at(x) < 0.0);
  }
}

TEST_CASE("free-space step matches the standalone admittance rollout") {
  EnvConfig c = quiet_config();
  c.start_pose = Vec3(0.0, 0.05, 0.0);
  PegInHoleEnv env(c);
  env.reset(4, RandomizationConfig{0, 0, 0, 0});
  Action a;
  a.dx = Vec3(1e-3, -2e-3, 0.01);
  a.k = Vec3(120.0, 640.0, 35.0);

  AdmittanceState s{Pose{c.start_pose}, Twist{Vector::Zero(3)}};
  const GainSet gains(Vector::Ones(3), a.k);
  const DesiredMotion d = setpoint(Pose{c.start_pose + a.dx});
  for (int i = 0; i < 2; ++i) {
    const auto out = env.step(a);
    DesiredMotion di = setpoint(Pose{c.start_pose + (i + 1) * a.dx});
    for (int j = 0; j < c.substeps; ++j) {
      s = admittance_step(s, i == 0 ? d : di, Wrench{Vector::Zero(3)}, gains, c.dt);
    }
    CHECK(out.state.x == Vec3(s.x_c.q));
    CHECK(out.state.v == Vec3(s.v_c.v));
    CHECK(out.state.f == Vec3::Zero());
  }
}

TEST_CASE("reported wrench equals the penalty wrench without scale or noise") {
  PegInHoleEnv env(quiet_config());
  env.reset(11);
  Action a;
  a.dx = Vec3(0.0, -2e-3, 0.0);
  a.k = Vec3(300.0, 300.0, 300.0);
  int in_contact = 0;
  while (!env.state().done) {
    const auto r = env.step(a);
    const Vec3 expect =
        contact_wrench(Pose{r.state.x}, Twist{r.state.v}, env.geometry(), env.config().params).f;
    CHECK(r.state.f == expect);
    in_contact += expect.norm() > 0.0;
  }
  CHECK(in_contact > 0);
}

TEST_CASE("reported wrench applies the force scale") {
  EnvConfig c = quiet_config();
  c.params.force_scale = 1.5;
  PegInHoleEnv env(c);
  env.reset(11);
  Action a;
  a.dx = Vec3(0.0, -2e-3, 0.0);
  for (int i = 0; i < 10 && !env.state().done; ++i) {
    const auto r = env.step(a);
    CHECK(r.state.f == 1.5 * env.true_wrench());
  }
}

TEST_CASE("reset with zero ranges returns the nominal start") {
  const EnvConfig c = quiet_config();
  PegInHoleEnv env(c);
  const auto s = env.reset(99, RandomizationConfig{0, 0, 0, 0});
  CHECK(s.x == c.start_pose);
  CHECK(s.v == Vec3::Zero());
  CHECK(s.t == 0);
  CHECK_FALSE(s.done);
  CHECK(env.geometry().hole_center_x == c.geometry.hole_center_x);
}

TEST_CASE("reset samples uniformly within the configured ranges") {
  const EnvConfig c = quiet_config();
  const RandomizationConfig r = c.randomization;
  PegInHoleEnv env(c);
  const int n = 1000;
  Eigen::Vector4d lo = Eigen::Vector4d::Constant(1e9), hi = -lo, sum = Eigen::Vector4d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto s = env.reset(static_cast<std::uint64_t>(i));
    const Eigen::Vector4d d(s.x[0] - c.start_pose[0], s.x[1] - c.start_pose[1],
                            s.x[2] - c.start_pose[2],
                            env.geometry().hole_center_x - c.geometry.hole_center_x);
    lo = lo.cwiseMin(d);
    hi = hi.cwiseMax(d);
    sum += d;
  }
  const Eigen::Vector4d half(r.peg_x, r.peg_z, r.peg_theta, r.hole_x);
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(lo[i] >= -half[i]);
    CHECK(hi[i] <= half[i]);
    CHECK(lo[i] < -0.9 * half[i]);
    CHECK(hi[i] > 0.9 * half[i]);
    const double sigma_mean = half[i] / std::sqrt(3.0) / std::sqrt(double(n));
    CHECK(std::abs(sum[i] / n) < 3.0 * sigma_mean);
  }
}

TEST_CASE("seed and actions determine the trajectory") {
  auto run = [](std::uint64_t seed) {
    PegInHoleEnv env(preset("shifted_friction"));
    std::vector<Vec3> out{env.reset(seed).f};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (!env.state().done) {
      Action a;
      a.dx = Vec3(1e-3 * u(rng), -1e-3 + 1e-3 * u(rng), 0.01 * u(rng));
      a.k = Vec3(500 + 400 * u(rng), 500 + 400 * u(rng), 500 + 400 * u(rng));
      const auto r = env.step(a);
      out.push_back(r.state.x);
      out.push_back(r.state.f);
    }
    return out;
  };
  CHECK(run(21) == run(21));
  CHECK(run(21) != run(22));
}

namespace {

// Largest per-substep relative energy increase, and max energy over the
// initial energy, for a static setpoint integrated like the environment.
struct EnergyTrace {
  double worst_increase = 0.0;
  double peak_ratio = 0.0;
};

EnergyTrace energy_trace(const Geometry& g, const EnvParams& p, const Vec3& x_d,
                         const Vec3& start, const GainSet& gains, double dt,
                         double duration) {
  auto energy = [&](const AdmittanceState& st) {
    const auto eval = evaluate_contacts(st.x_c, st.v_c, g, p);
    double e = 0.5 * st.v_c.v.squaredNorm();
    e += 0.5 * (gains.stiffness().array() * (st.x_c.q - x_d).array().square()).sum();
    for (const auto& ct : eval.contacts) {
      e += 0.5 * p.contact_stiffness * ct.penetration * ct.penetration;
    }
    return e;
  };
  AdmittanceState s{Pose{start}, Twist{Vector::Zero(3)}};
  const double e0 = energy(s);
  double prev = e0;
  EnergyTrace out{0.0, 1.0};
  const auto n = std::llround(duration / dt);
  for (long long i = 0; i < n; ++i) {
    const auto eval = evaluate_contacts(s.x_c, s.v_c, g, p);
    s = admittance_step(s, setpoint(Pose{x_d}), eval.wrench, gains, dt, eval.velocity_slope);
    const double e = energy(s);
    out.worst_increase = std::max(out.worst_increase, (e - prev) / e0);
    out.peak_ratio = std::max(out.peak_ratio, e / e0);
    prev = e;
  }
  return out;
}

}  // namespace

TEST_CASE("total energy does not grow under a static setpoint") {
  // Kinetic energy alone rises as the virtual spring releases; the
  // dissipative quantity is kinetic + admittance spring + contact penalty.
  // At the controller rate the explicit contact onset can add a few percent
  // within one substep, so the monotone check runs at dt / 10 and the
  // controller-rate check bounds the energy by its initial value at the
  // configured contact damping.
  const EnvConfig c = quiet_config();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> px(-2e-3, 2e-3), pz(-0.016, -1e-3),
      pth(-0.02, 0.02), kk(10.0, 1000.0);
  for (double damping : {100.0, 0.0}) {
    EnvParams p = c.params;
    p.contact_damping = damping;
    for (int trial = 0; trial < 50; ++trial) {
      CAPTURE(trial);
      const Vec3 x_d(px(rng), pz(rng), pth(rng));
      const GainSet gains = GainSet::with_unit_inertia(Vec3(kk(rng), kk(rng), kk(rng)));
      const Vec3 start = x_d + Vec3(px(rng), 1e-3, 0.0);
      const auto fine = energy_trace(c.geometry, p, x_d, start, gains, c.dt / 10, 1.0);
      CHECK(fine.worst_increase <= 1e-12);
      const auto coarse = energy_trace(c.geometry, p, x_d, start, gains, c.dt, 1.0);
      if (damping == c.params.contact_damping) CHECK(coarse.peak_ratio <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("stepping before reset or after done is a usage error") {
  PegInHoleEnv env(quiet_config());
  auto kind = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  CHECK(kind([&] { env.step(Action{}); }) == ErrorKind::kUsage);
  env.reset(0);
  while (!env.state().done) env.step(Action{});
  CHECK(kind([&] { env.step(Action{}); }) == ErrorKind::kUsage);
}

TEST_CASE("actions are clamped to the bounds") {
  PegInHoleEnv env(quiet_config());
  Action a;
  a.dx = Vec3(1.0, -1.0, 5.0);
  a.k = Vec3(0.0, 1e9, 500.0);
  const Action c = env.clamp(a);
  CHECK(c.dx == Vec3(2e-3, -2e-3, 0.02));
  CHECK(c.k == Vec3(10.0, 1000.0, 500.0));
}

TEST_CASE("presets load by name and round-trip through JSON") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const EnvConfig c = preset(name);
    CHECK_NOTHROW(c.validate());
    const EnvConfig back = env_config_from_json(env_config_to_json(c));
    CHECK(env_config_to_json(back) == env_config_to_json(c));
  }
  CHECK(preset("shifted_scale_low").params.force_scale == 0.5);
  CHECK(preset("shifted_scale_high").params.force_scale == 1.5);
  CHECK(preset("shifted_friction").params.friction_mu == 2.0 * preset("train_nominal").params.friction_mu);
  CHECK(preset("shifted_stiffness").params.contact_stiffness == 3.0 * preset("train_nominal").params.contact_stiffness);
  CHECK(preset("clearance_005").geometry.clearance() == doctest::Approx(5e-5));
  CHECK(preset("clearance_002").geometry.clearance() == doctest::Approx(2e-5));
  CHECK(preset("negative_005").geometry.clearance() == doctest::Approx(-5e-5));
  CHECK(preset("train_nominal").geometry.clearance() == doctest::Approx(3e-4));
  CHECK_THROWS_AS(preset("no_such_preset"), Error);
}
