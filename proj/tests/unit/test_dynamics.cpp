#include "doctest.h"

#include "heli/dynamics.hpp"
#include "heli/error.hpp"
#include "heli/integrator.hpp"
#include "heli/linearize.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace heli;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Thrust and momentum relations written out again, independent of the solver.
double oracle_thrust(const Vec3& air, double col, double v, const HelicopterParams& p) {
  const double R = p.rotor_radius;
  const double pitch_speed = air.z() + 2.0 / 3.0 * p.rotor_speed * R * p.k_col * col;
  return std::max(0.0, p.air_density * p.rotor_speed * R * R * p.lift_curve_slope *
                           p.blade_count * p.blade_chord / 4.0 * (pitch_speed - v));
}

double oracle_inflow(const Vec3& air, double T, double v, const HelicopterParams& p) {
  const double vhat2 = air.squaredNorm() - 2.0 * air.z() * v;
  const double h = T / (2.0 * p.air_density * kPi * p.rotor_radius * p.rotor_radius);
  return std::sqrt(std::max(0.0, std::sqrt(vhat2 * vhat2 / 4.0 + h * h) - vhat2 / 2.0));
}

// Scans v on a grid for a sign change of v - inflow(thrust(v), v), then bisects.
double oracle_fixed_point(const Vec3& air, double col, const HelicopterParams& p) {
  auto g = [&](double v) { return v - oracle_inflow(air, oracle_thrust(air, col, v, p), v, p); };
  double lo = 0.0, hi = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    hi = i * 1e-3;
    if (g(hi) > 0.0) break;
    lo = hi;
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

HelicopterParams forces_off() {
  HelicopterParams p;
  p.switches.aerodynamics = false;
  p.switches.gravity = false;
  return p;
}

}  // namespace

TEST_CASE("rotation matrix") {
  CHECK((rotation_matrix(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);

  const Mat3 yaw = rotation_matrix(Vec3(0, 0, kPi / 2));
  CHECK((yaw.row(0) - Eigen::RowVector3d(0, 1, 0)).norm() < 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const Mat3 R = rotation_matrix(Vec3(ang(rng), ang(rng) / 2, ang(rng)));
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Euler-rate matrix") {
  CHECK((euler_rate_matrix(Vec3(0, 0, 1.3)) - Mat3::Identity()).norm() < 1e-15);

  const Mat3 S = euler_rate_matrix(Vec3(0, kPi / 4, 0));
  CHECK((S.row(0) - Eigen::RowVector3d(1, 0, 1)).norm() < 1e-15);
  CHECK((S.row(2) - Eigen::RowVector3d(0, 0, std::sqrt(2.0))).norm() < 1e-15);

  CHECK_THROWS_AS(euler_rate_matrix(Vec3(0, kPi / 2 - 1e-9, 0)), SingularityError);
}

TEST_CASE("rotor inflow at hover matches momentum theory") {
  HelicopterParams p;
  const TrimPoint trim = find_trim(p);
  const RotorSolution sol =
      induced_velocity_and_thrust(trim.state, trim.inputs.col, Vec3::Zero(), p);
  const double closed_form =
      std::sqrt(sol.thrust / (2.0 * p.air_density * kPi * p.rotor_radius * p.rotor_radius));
  CHECK(sol.residual < 1e-9);
  CHECK(sol.induced_velocity == doctest::Approx(closed_form).epsilon(1e-6));
  CHECK(sol.induced_velocity == doctest::Approx(3.80).epsilon(5e-3));
  CHECK(sol.thrust == doctest::Approx(p.mass * p.gravity).epsilon(1e-2));
}

TEST_CASE("zero blade pitch and zero airspeed give no thrust") {
  HelicopterParams p;
  const RotorSolution sol = induced_velocity_and_thrust(VehicleState{}, 0.0, Vec3::Zero(), p);
  CHECK(sol.thrust == 0.0);
  CHECK(sol.induced_velocity < 1e-9);
}

TEST_CASE("rotor inflow in a 3 m/s crosswind agrees with a grid-and-bisection oracle") {
  HelicopterParams p;
  const TrimPoint trim = find_trim(p);
  VehicleState s;  // level, flaps zero so the oracle needs no flap terms
  const Vec3 wind(0.0, 3.0, 0.0);
  const RotorSolution sol = induced_velocity_and_thrust(s, trim.inputs.col, wind, p);
  const double v = oracle_fixed_point(-wind, trim.inputs.col, p);
  CHECK(sol.induced_velocity == doctest::Approx(v).epsilon(1e-6));
  CHECK(sol.thrust == doctest::Approx(oracle_thrust(-wind, trim.inputs.col, v, p)).epsilon(1e-6));
}

TEST_CASE("main-rotor wrench") {
  HelicopterParams p;
  const double T = 74.556;
  VehicleState s;
  Wrench w = main_rotor_wrench(s, T, 3.8, Vec3::Zero(), p);
  CHECK((w.force - Vec3(0, 0, -T)).norm() < 1e-12);
  CHECK(w.moment.x() == 0.0);
  CHECK(w.moment.y() == 0.0);

  s.flap_lon = 0.01;
  w = main_rotor_wrench(s, T, 3.8, Vec3::Zero(), p);
  CHECK(w.moment.y() == doctest::Approx((p.rotor_spring + T * p.hub_height) * std::sin(0.01)));
}

TEST_CASE("climb power is active only while climbing and has a kink at hover") {
  HelicopterParams p;
  CHECK(climb_power(-1.0, p) == doctest::Approx(74.556).epsilon(1e-12));
  CHECK(climb_power(1.0, p) == 0.0);
  const double h = 1e-6;
  const double left = (climb_power(0.0, p) - climb_power(-h, p)) / h;
  const double right = (climb_power(h, p) - climb_power(0.0, p)) / h;
  CHECK(left == doctest::Approx(-p.mass * p.gravity));
  CHECK(right == 0.0);
}

TEST_CASE("fuselage drag") {
  HelicopterParams p;
  CHECK(fuselage_drag(Vec3::Zero(), 0.0, Vec3::Zero(), p).norm() == 0.0);
  const Vec3 fwd = fuselage_drag(Vec3(2, 0, 0), 3.8, Vec3::Zero(), p);
  CHECK(fwd.x() == doctest::Approx(-0.5 * p.air_density * p.drag_area_x * 2.0 * 3.8));
  const Vec3 back = fuselage_drag(Vec3(-2, 0, 0), 3.8, Vec3::Zero(), p);
  CHECK(back.x() == -fwd.x());
}

TEST_CASE("tail-rotor wrench scales with the command through the two arms") {
  HelicopterParams p;
  const Wrench zero = tail_rotor_wrench(0.0, p);
  CHECK(zero.force.norm() == 0.0);
  CHECK(zero.moment.norm() == 0.0);
  const Wrench w = tail_rotor_wrench(0.1, p);
  const double thrust = p.tail_thrust_gain * 0.1;
  CHECK(std::abs(w.force.y()) == doctest::Approx(thrust));
  CHECK(w.moment.x() == doctest::Approx(thrust * p.tail_roll_arm));
  CHECK(w.moment.z() == doctest::Approx(thrust * p.tail_yaw_arm));
  CHECK(w.moment.y() == 0.0);
}

TEST_CASE("flapping settles at the linkage deflection") {
  HelicopterParams p;
  const FlapRates rest = flapping_derivatives(VehicleState{}, 0.0, 0.0, p);
  CHECK(rest.lon == 0.0);
  CHECK(rest.lat == 0.0);

  p.rotor_spring = 0.0;  // no cross coupling
  VehicleState s;
  const double dt = 1e-3;
  for (int i = 0; i < 2000; ++i) {  // ~25 time constants
    s.flap_lon += dt * flapping_derivatives(s, 0.0, 0.1, p).lon;
  }
  CHECK(s.flap_lon == doctest::Approx(0.054).epsilon(1e-9));
  s.flap_lon = 0.054;
  CHECK(std::abs(flapping_derivatives(s, 0.0, 0.1, p).lon) < 1e-12);
}

TEST_CASE("yaw gyro PI loop") {
  HelicopterParams p;
  // Matched rate: no error, no integration.
  CHECK(yaw_gyro_derivative(p.gyro_amp * 0.2, 0.2, p) == 0.0);
  CHECK(gyro_output(p.gyro_amp * 0.2, 0.2, 0.0, p) == 0.0);

  // Pedal step with the yaw rate held at zero: proportional part plus a ramp.
  const double ped = 0.1;
  double z = 0.0;
  const double dt = 0.01;
  for (int i = 0; i < 300; ++i) {
    z = rk4_step([&](double) { return yaw_gyro_derivative(0.0, ped, p); }, z, dt);
  }
  const double t = 3.0;
  CHECK(gyro_output(0.0, ped, z, p) ==
        doctest::Approx(p.gyro_kp * p.gyro_amp * ped + p.gyro_ki * p.gyro_amp * ped * t));

  p.gyro_ki = 0.0;
  CHECK(gyro_output(0.0, ped, z, p) == doctest::Approx(p.gyro_kp * p.gyro_amp * ped));
}

TEST_CASE("rigid-body kinematics with forces switched off") {
  HelicopterParams p = forces_off();
  p.switches.gravity = true;
  const VehicleState fall = state_derivative(VehicleState{}, ControlInputs{}, Vec3::Zero(), p);
  CHECK((fall.velocity - Vec3(0, 0, p.gravity)).norm() < 1e-15);

  p = forces_off();
  VehicleState roll;
  roll.rates = Vec3(0.3, 0, 0);
  const VehicleState d = state_derivative(roll, ControlInputs{}, Vec3::Zero(), p);
  CHECK(d.euler.x() == doctest::Approx(0.3));
  CHECK(d.euler.y() == 0.0);
  CHECK(d.euler.z() == 0.0);
}

TEST_CASE("a state with zero derivative is left unchanged by a step") {
  const HelicopterParams p = forces_off();
  VehicleState s;
  s.position = Vec3(1, 2, -3);
  s.euler = Vec3(0.1, -0.2, 0.3);
  const VehicleState next = step(s, ControlInputs{}, Vec3::Zero(), 0.002, p);
  CHECK(next.to_vector() == s.to_vector());
}

TEST_CASE("integration rejects oversize steps and non-finite states") {
  HelicopterParams p;
  CHECK_THROWS_AS(step(VehicleState{}, ControlInputs{}, Vec3::Zero(), 0.01, p), IntegrationError);
  VehicleState bad;
  bad.velocity.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step(bad, ControlInputs{}, Vec3::Zero(), 0.002, forces_off()), IntegrationError);
}

TEST_CASE("RK4 is fourth order") {
  Eigen::Matrix2d A;
  A << 0, 1, -4, -0.4;
  const Eigen::Vector2d x0(1, 0);
  auto solve = [&](int n) {
    Eigen::Vector2d x = x0;
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) {
      x = rk4_step([&](const Eigen::Vector2d& y) -> Eigen::Vector2d { return A * y; }, x, h);
    }
    return x;
  };
  const Eigen::Vector2d exact = solve(20000);
  const double ratio = (solve(20) - exact).norm() / (solve(40) - exact).norm();
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("hover trim held open loop drifts less than a millimetre in 10 s") {
  HelicopterParams p;
  const TrimPoint trim = find_trim(p);
  VehicleState s = trim.state;
  for (int i = 0; i < 5000; ++i) s = step(s, trim.inputs, Vec3::Zero(), 0.002, p);
  CHECK((s.position - trim.state.position).norm() < 1e-3);
}

TEST_CASE("stepping is deterministic") {
  HelicopterParams p;
  const TrimPoint trim = find_trim(p);
  VehicleState a = trim.state, b = trim.state;
  const ControlInputs u{0.05, -0.02, 0.01, trim.inputs.col};
  for (int i = 0; i < 200; ++i) {
    a = step(a, u, Vec3(0, 1, 0), 0.002, p);
    b = step(b, u, Vec3(0, 1, 0), 0.002, p);
  }
  CHECK(a.to_vector() == b.to_vector());
}
