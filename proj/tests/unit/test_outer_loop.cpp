#include "doctest.h"

#include "heli/check.hpp"
#include "heli/error.hpp"
#include "heli/linearize.hpp"
#include "heli/outer_loop.hpp"

#include <cmath>
#include <random>

using namespace heli;

namespace {

PerformanceEnvelope constant_envelope(double tau, double m) {
  PerformanceEnvelope env;
  for (auto& a : env.axes) a = {tau, tau, 1.1, m};
  return env;
}

}  // namespace

TEST_CASE("performance function decays from its start to its floor") {
  PerformanceEnvelope env;
  env.axes[0] = {2.0, 0.5, 1.1, 1.7};
  CHECK(performance_function(0.0, env, 0) == 2.0);
  CHECK(performance_function(1.0, env, 0) == doctest::Approx(0.5 + 1.5 * std::exp(-1.1)));
  CHECK(performance_function(1.0, env, 0) == doctest::Approx(0.9994).epsilon(1e-4));
  CHECK(performance_function(1e3, env, 0) == doctest::Approx(0.5).epsilon(1e-15));
  double previous = 3.0;
  for (double t = 0.0; t < 20.0; t += 0.1) {
    const double tau = performance_function(t, env, 0);
    CHECK(tau < previous);
    previous = tau;
  }
}

TEST_CASE("normalized errors") {
  PerformanceEnvelope env = constant_envelope(2.0, 1.7);
  Measurement m;
  Reference ref;
  CHECK(normalized_errors(m, ref, env, 0.0).e.norm() == 0.0);

  ref.position = Vec3(1.0, 0.0, 0.0);
  const NormalizedErrors err = normalized_errors(m, ref, env, 0.0);
  CHECK(err.e.x() == doctest::Approx(0.85));
  CHECK(err.margin.x() == doctest::Approx(2.0 - 1.7));

  SUBCASE("the vertical error is a height error") {
    Reference up;
    up.position = Vec3(0, 0, -0.5);  // reference 0.5 m above the vehicle
    CHECK(normalized_errors(m, up, env, 0.0).position_error.z() == doctest::Approx(0.5));
  }
  SUBCASE("touching the envelope is a violation naming the axis") {
    Reference edge;
    edge.velocity = Vec3(0.0, 2.0, 0.0);
    try {
      normalized_errors(m, edge, env, 0.0);
      FAIL("expected an envelope violation");
    } catch (const EnvelopeViolation& v) {
      CHECK(v.axis() == 1);
      CHECK(v.margin() <= 0.0);
    }
  }
}

TEST_CASE("error controller") {
  ErrorGains gains;
  const Vec3 tau(1.0, 1.0, 1.0);
  const double bias = 1.0;

  SUBCASE("zero error leaves only the hover bias") {
    OuterLoopState st;
    const Vec3 u = error_controller(Vec3::Zero(), tau, gains, st, 0.01, 0.3, bias);
    CHECK((u - Vec3(0, 0, -bias)).norm() == 0.0);
  }
  SUBCASE("half-way error on the forward axis") {
    OuterLoopState st;
    const Vec3 u = error_controller(Vec3(0.5, 0, 0), tau, gains, st, 0.01, 0.0, bias);
    CHECK(u.x() == doctest::Approx(-0.16 / 0.75 * std::atanh(0.5)));
    CHECK(u.x() == doctest::Approx(-0.1172).epsilon(1e-3));
    CHECK(u.y() == 0.0);
  }
  SUBCASE("heading rotates the horizontal demand") {
    OuterLoopState a, b;
    const Vec3 ref = error_controller(Vec3(0.5, 0, 0), tau, gains, a, 0.01, 0.0, bias);
    const Vec3 rot = error_controller(Vec3(0.5, 0, 0), tau, gains, b, 0.01, M_PI / 2, bias);
    CHECK(rot.x() == doctest::Approx(0.0).scale(1.0));
    CHECK(rot.y() == doctest::Approx(-ref.x()));
  }
  SUBCASE("barrier demand grows without bound toward the envelope") {
    double previous = 0.0;
    for (double e = 0.0; e < 0.9999; e += 0.001) {
      OuterLoopState st;
      const double ux = std::abs(error_controller(Vec3(e, 0, 0), tau, gains, st, 0.0, 0.0, 0.0).x());
      CHECK(ux >= previous);
      previous = ux;
    }
    CHECK(previous > 10.0);
    OuterLoopState st;
    CHECK_THROWS_AS(error_controller(Vec3(1.0, 0, 0), tau, gains, st, 0.0, 0.0, 0.0),
                    EnvelopeViolation);
  }
  SUBCASE("integral is trapezoidal, clamped, and frozen while saturated") {
    OuterLoopState st;
    gains.integral_limit = 0.02;
    const Vec3 e(0.5, 0, 0);
    error_controller(e, tau, gains, st, 0.01, 0.0, 0.0);
    CHECK(st.integral.x() == 0.0);  // first sample only seeds the rule
    error_controller(e, tau, gains, st, 0.01, 0.0, 0.0);
    CHECK(st.integral.x() == doctest::Approx(0.01 * std::atanh(0.5)));
    st.saturated = true;
    error_controller(e, tau, gains, st, 0.01, 0.0, 0.0);
    CHECK(st.integral.x() == doctest::Approx(0.01 * std::atanh(0.5)));
    st.saturated = false;
    for (int i = 0; i < 10; ++i) error_controller(e, tau, gains, st, 0.01, 0.0, 0.0);
    CHECK(st.integral.x() == 0.02);
  }
}

TEST_CASE("attitude command from the thrust demand") {
  const Eigen::Vector4d none = Eigen::Vector4d::Zero();
  const AttitudeCommand vertical = attitude_command(Vec3(0, 0, -1.2), 0.7, 0.35, 1e-6, none);
  CHECK(vertical.r_out == Eigen::Vector4d(0, 0, 0.7, -1.2));

  const Vec3 lateral(0, 0.2, -1.0);
  const AttitudeCommand lat = attitude_command(lateral, 0.0, 0.35, 1e-6, none);
  CHECK(lat.r_out[1] == 0.0);
  CHECK(lat.r_out[0] == doctest::Approx(-std::asin(0.2 / lateral.norm())));

  const AttitudeCommand clamped = attitude_command(Vec3(0, 5, -1), 0.0, 0.35, 1e-6, none);
  CHECK(clamped.clamped);
  CHECK(clamped.r_out[0] == -0.35);

  const Eigen::Vector4d prev(0.1, -0.1, 0.0, -1.0);
  const AttitudeCommand held = attitude_command(Vec3::Zero(), 2.0, 0.35, 1e-6, prev);
  CHECK(held.held);
  CHECK(held.r_out == Eigen::Vector4d(0.1, -0.1, 2.0, -1.0));
}

TEST_CASE("thrust direction round trip over random demands") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec3 u(n(rng), n(rng), -std::abs(n(rng)) - 1e-3);
    const Eigen::Vector2d tilt = thrust_tilt(u);
    worst = std::max(worst, (oracle::command_direction(tilt[0], tilt[1]) - u.normalized()).norm());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("velocity-error dynamics") {
  HelicopterParams p;
  const TrimPoint trim = find_trim(p);

  CHECK(position_error_dynamics(trim.state, trim.inputs, Vec3::Zero(), Vec3::Zero(), p).norm() <
        1e-8);

  // Errors are reference minus actual in north-east-up axes, so a reference
  // accelerating away from a hovering vehicle grows the error with it.
  const Vec3 a_ref(0.1, -0.2, 0.3);
  const Vec3 d = position_error_dynamics(trim.state, trim.inputs, Vec3::Zero(), a_ref, p);
  CHECK((d - Vec3(0.1, -0.2, -0.3)).norm() < 1e-8);

  SUBCASE("matches a central difference along a trajectory") {
    VehicleState s = trim.state;
    const ControlInputs u{0.05, -0.03, 0.02, trim.inputs.col + 0.01};
    const Vec3 wind(1.0, 0.5, 0.0);
    Reference ref;
    auto eps_v = [&](const VehicleState& x, double t) {
      ref.velocity = a_ref * t;
      return velocity_error(rotation_matrix(x.euler).transpose() * x.velocity, ref);
    };
    const double h = 1e-3;
    for (int i = 0; i < 200; ++i) s = step(s, u, wind, 0.002, p);
    const VehicleState before = s;
    const VehicleState mid = step(before, u, wind, h, p);
    const VehicleState after = step(mid, u, wind, h, p);
    const Vec3 fd = (eps_v(after, 2 * h) - eps_v(before, 0.0)) / (2 * h);
    const Vec3 exact = position_error_dynamics(mid, u, wind, a_ref, p);
    CHECK((fd - exact).norm() < 1e-5);
  }
}

TEST_CASE("outer loop") {
  ControllerParams ctrl;
  Measurement m;
  m.position = Vec3(0, 0, -0.2);
  Reference ref;
  ref.position = Vec3(0, 0, -0.2);

  SUBCASE("a large starting error widens the initial envelope") {
    Reference far = ref;
    far.position.x() = 3.0;
    OuterLoop loop(ctrl, 1.0);
    const auto out = loop.update(m, far, 0.0, 0.01);
    CHECK(std::abs(out.errors.e.x()) < 0.5);
    CHECK(loop.envelope().axes[0].tau_start > ctrl.axes[0].tau_start);
  }
  SUBCASE("hovering at the reference commands level attitude and the bias") {
    OuterLoop loop(ctrl, 1.02);
    ref.heading = 0.4;
    m.heading = 0.4;
    const auto out = loop.update(m, ref, 0.0, 0.01);
    CHECK(out.command.r_out == Eigen::Vector4d(0, 0, 0.4, -1.02));
  }
  SUBCASE("identical inputs give identical outputs") {
    OuterLoop a(ctrl, 1.0), b(ctrl, 1.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 0.05);
    for (int k = 0; k < 500; ++k) {
      Measurement mk = m;
      mk.position += Vec3(n(rng), n(rng), n(rng));
      const auto oa = a.update(mk, ref, 0.01 * k, 0.01);
      const auto ob = b.update(mk, ref, 0.01 * k, 0.01);
      CHECK(oa.u_m == ob.u_m);
    }
  }
}
