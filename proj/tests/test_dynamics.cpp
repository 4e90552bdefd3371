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
#include "pihlab/dynamics.hpp"
#include "pihlab/error.hpp"

using namespace pihlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

AdmittanceState rest(Eigen::Index n) {
  return {Pose{Vector::Zero(n)}, Twist{Vector::Zero(n)}};
}

// Endpoint and largest overshoot past x_d = 1 of a unit step response.
struct StepRun {
  double end = 0.0;
  double overshoot = 0.0;
  std::vector<double> samples;  // every `stride` steps
};

StepRun step_response(double m, double k, double dt, double duration,
                      int stride = 1) {
  const GainSet g(vec({m}), vec({k}));
  AdmittanceState s = rest(1);
  const DesiredMotion d = setpoint(Pose{vec({1.0})});
  const Wrench f{Vector::Zero(1)};
  const auto n = std::llround(duration / dt);
  StepRun out;
  for (long long i = 0; i < n; ++i) {
    s = admittance_step(s, d, f, g, dt);
    out.overshoot = std::max(out.overshoot, s.x_c.q(0) - 1.0);
    if ((i + 1) % stride == 0) out.samples.push_back(s.x_c.q(0));
  }
  out.end = s.x_c.q(0);
  return out;
}

}  // namespace

TEST_CASE("derive_damping evaluates 4 sqrt(m k)") {
  CHECK(derive_damping(vec({1}), vec({400}))(0) == 80.0);
  CHECK(derive_damping(vec({4}), vec({100}))(0) == 80.0);
  CHECK(derive_damping(vec({1, 1, 1}), vec({1, 1, 1})) == vec({4, 4, 4}));
}

TEST_CASE("derive_damping rejects non-positive or mismatched gains") {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::kUsage;
  };
  CHECK(kind_of([] { derive_damping(vec({0}), vec({1})); }) == ErrorKind::kInvalidGain);
  CHECK(kind_of([] { derive_damping(vec({1}), vec({-5})); }) == ErrorKind::kInvalidGain);
  CHECK(kind_of([] { derive_damping(vec({1}), vec({NAN})); }) == ErrorKind::kInvalidGain);
  CHECK(kind_of([] { derive_damping(vec({1, 1}), vec({1})); }) == ErrorKind::kUsage);
  CHECK_THROWS_AS(GainSet(vec({1}), vec({0})), Error);
}

TEST_CASE("GainSet damping identity holds bitwise") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logu(-3.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector m(3), k(3);
    for (int i = 0; i < 3; ++i) {
      m(i) = std::pow(10.0, logu(rng));
      k(i) = std::pow(10.0, logu(rng));
    }
    const GainSet g(m, k);
    for (int i = 0; i < 3; ++i) CHECK(g.damping()(i) == 4.0 * std::sqrt(m(i) * k(i)));
  }
}

TEST_CASE("equilibrium is a fixed point") {
  const GainSet g(vec({1, 1, 1}), vec({300, 500, 50}));
  AdmittanceState s{Pose{vec({0.1, -0.2, 0.3})}, Twist{Vector::Zero(3)}};
  const auto next = admittance_step(s, setpoint(s.x_c), Wrench{Vector::Zero(3)}, g, 0.002);
  CHECK(next.x_c.q == s.x_c.q);
  CHECK(next.v_c.v == s.v_c.v);
}

TEST_CASE("constant force settles at K^-1 f, linearly in f") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> km(10.0, 1000.0), fm(-20.0, 20.0), mm(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector m = vec({mm(rng), mm(rng)});
    const Vector k = vec({km(rng), km(rng)});
    const Vector f = vec({fm(rng), fm(rng)});
    const GainSet g(m, k);
    auto settle = [&](const Vector& force) {
      AdmittanceState s = rest(2);
      const DesiredMotion d = setpoint(Pose{Vector::Zero(2)});
      for (int i = 0; i < 40000; ++i) s = admittance_step(s, d, Wrench{force}, g, 0.002);
      return s.x_c.q;
    };
    const Vector x1 = settle(f);
    const Vector x2 = settle(2.0 * f);
    for (int i = 0; i < 2; ++i) {
      CHECK(x1(i) == doctest::Approx(f(i) / k(i)).epsilon(1e-3));
      CHECK(x2(i) == doctest::Approx(2.0 * x1(i)).epsilon(1e-9));
    }
  }
}

TEST_CASE("step response never overshoots") {
  for (double m : {0.2, 1.0, 5.0}) {
    for (double k : {10.0, 100.0, 500.0, 1000.0}) {
      CAPTURE(m);
      CAPTURE(k);
      const StepRun r = step_response(m, k, 0.002, 3.0);
      CHECK(r.overshoot <= 0.0);
    }
  }
}

TEST_CASE("step response agrees with a fine-step reference integrator") {
  for (double k : {10.0, 100.0, 1000.0}) {
    CAPTURE(k);
    // Settled endpoint: the two integrators agree to 1e-4 of the step.
    // Slow pole of s^2 + 4 sqrt(k) s + k is (2 - sqrt(3)) sqrt(k).
    const double horizon = 16.0 / ((2.0 - std::sqrt(3.0)) * std::sqrt(k));
    const double coarse = step_response(1.0, k, 0.002, horizon).end;
    const double fine = step_response(1.0, k, 0.002 / 100, horizon).end;
    CHECK(std::abs(coarse - fine) < 1e-4);

    // Over the transient the gap is first order in dt.
    const StepRun a = step_response(1.0, k, 0.002, 0.4, 1);
    const StepRun b = step_response(1.0, k, 0.001, 0.4, 2);
    const StepRun ref = step_response(1.0, k, 0.00002, 0.4, 100);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      ea = std::max(ea, std::abs(a.samples[i] - ref.samples[i]));
      eb = std::max(eb, std::abs(b.samples[i] - ref.samples[i]));
    }
    CHECK(ea < 0.02);
    CHECK(ea / eb == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("halving dt changes a one-second endpoint by O(dt)") {
  const GainSet g(vec({1.0}), vec({200.0}));
  auto endpoint = [&](double dt) {
    AdmittanceState s = rest(1);
    const DesiredMotion d = setpoint(Pose{vec({0.01})});
    const auto n = std::llround(1.0 / dt);
    for (long long i = 0; i < n; ++i) s = admittance_step(s, d, Wrench{vec({3.0})}, g, dt);
    return s.x_c.q(0);
  };
  const double e1 = std::abs(endpoint(0.004) - endpoint(0.0005));
  const double e2 = std::abs(endpoint(0.002) - endpoint(0.0005));
  CHECK(e2 < e1);
  // First order: error(dt) ~ C (dt - dt_ref), so e1 / e2 ~ 3.5 / 1.5.
  CHECK(e1 / e2 == doctest::Approx(3.5 / 1.5).epsilon(0.1));
}

TEST_CASE("admittance_step validates its inputs") {
  const GainSet g(vec({1.0}), vec({100.0}));
  const AdmittanceState s = rest(1);
  const DesiredMotion d = setpoint(Pose{vec({0.0})});
  CHECK_THROWS_AS(admittance_step(s, d, Wrench{vec({1.0})}, g, 0.0), Error);
  CHECK_THROWS_AS(admittance_step(s, d, Wrench{vec({1.0, 2.0})}, g, 0.002), Error);
  try {
    admittance_step(s, d, Wrench{vec({NAN})}, g, 0.002);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
  }
}

TEST_CASE("zero force slope reproduces the explicit step bitwise") {
  const GainSet g(vec({1.0, 1.0}), vec({250.0, 700.0}));
  AdmittanceState s{Pose{vec({0.01, -0.02})}, Twist{vec({0.1, -0.3})}};
  const DesiredMotion d = setpoint(Pose{vec({0.0, 0.0})});
  const Wrench f{vec({2.0, -1.5})};
  const auto a = admittance_step(s, d, f, g, 0.002);
  const auto b = admittance_step(s, d, f, g, 0.002, Vector::Zero(2));
  CHECK(a.x_c.q == b.x_c.q);
  CHECK(a.v_c.v == b.v_c.v);
}
