#include "heli/dynamics.hpp"

#include "heli/error.hpp"
#include "heli/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace heli {

VehicleState::Vector VehicleState::to_vector() const {
  Vector v;
  v << position, velocity, euler, rates, flap_lon, flap_lat, gyro_integral;
  return v;
}

VehicleState VehicleState::from_vector(const Vector& v) {
  VehicleState s;
  s.position = v.segment<3>(kX);
  s.velocity = v.segment<3>(kU);
  s.euler = v.segment<3>(kPhi);
  s.rates = v.segment<3>(kP);
  s.flap_lon = v[kFlapLon];
  s.flap_lat = v[kFlapLat];
  s.gyro_integral = v[kGyro];
  return s;
}

bool VehicleState::finite() const { return to_vector().allFinite(); }

ControlInputs ControlInputs::saturated(double lo, double hi) const {
  return {std::clamp(lat, lo, hi), std::clamp(lon, lo, hi), std::clamp(ped, lo, hi),
          std::clamp(col, lo, hi)};
}

Mat3 rotation_matrix(const Vec3& euler) {
  const double sf = std::sin(euler.x()), cf = std::cos(euler.x());
  const double st = std::sin(euler.y()), ct = std::cos(euler.y());
  const double sp = std::sin(euler.z()), cp = std::cos(euler.z());
  Mat3 r;
  r << ct * cp, ct * sp, -st,
       sf * st * cp - cf * sp, sf * st * sp + cf * cp, sf * ct,
       cf * st * cp + sf * sp, cf * st * sp - sf * cp, cf * ct;
  return r;
}

Mat3 euler_rate_matrix(const Vec3& euler, double min_cos_pitch) {
  const double sf = std::sin(euler.x()), cf = std::cos(euler.x());
  const double ct = std::cos(euler.y());
  if (!(std::abs(ct) >= min_cos_pitch)) {
    std::ostringstream msg;
    msg << "Euler-rate matrix singular: theta = " << euler.y() << " rad, |cos(theta)| = "
        << std::abs(ct) << " < " << min_cos_pitch;
    throw SingularityError(msg.str());
  }
  const double tt = std::tan(euler.y());
  Mat3 s;
  s << 1.0, tt * sf, tt * cf,
       0.0, cf, -sf,
       0.0, sf / ct, cf / ct;
  return s;
}

double rotor_thrust(const Vec3& air, double flap_lon, double flap_lat, double collective,
                    double induced_velocity, const HelicopterParams& p) {
  const double R = p.rotor_radius;
  const double blade_inflow = air.z() + flap_lon * air.x() - flap_lat * air.y() +
                              (2.0 / 3.0) * p.rotor_speed * R * p.k_col * collective;
  const double coeff = p.air_density * p.rotor_speed * R * R * p.lift_curve_slope *
                       p.blade_count * p.blade_chord / 4.0;
  return std::max(0.0, coeff * (blade_inflow - induced_velocity));
}

double momentum_induced_velocity(const Vec3& air, double thrust, double induced_velocity,
                                 const HelicopterParams& p, bool* clamped) {
  // v^2 = sqrt(vhat^4/4 + (T / (2 rho A))^2) - vhat^2/2,
  // vhat^2 = u^2 + v^2 + w (w - 2 v_im).
  const double vhat2 = air.x() * air.x() + air.y() * air.y() +
                       air.z() * (air.z() - 2.0 * induced_velocity);
  const double hover = thrust / (2.0 * p.air_density * p.disk_area());
  const double v2 = std::sqrt(0.25 * vhat2 * vhat2 + hover * hover) - 0.5 * vhat2;
  if (v2 < 0.0) {
    if (clamped) *clamped = true;
    return 0.0;
  }
  return std::sqrt(v2);
}

RotorSolution induced_velocity_and_thrust(const VehicleState& s, double collective,
                                          const WindVector& wind, const HelicopterParams& p,
                                          double warm_start) {
  const Vec3 air = s.velocity - wind;
  auto image = [&](double v, bool* clamped) {
    const double t = rotor_thrust(air, s.flap_lon, s.flap_lat, collective, v, p);
    return momentum_induced_velocity(air, t, v, p, clamped);
  };
  auto residual = [&](double v) {
    return std::abs(v - image(v, nullptr)) / std::max(1.0, v);
  };

  constexpr int kMaxIter = 200;
  constexpr double kRelax = 0.5;
  constexpr double kAccept = 1e-12;
  const double eps = std::numeric_limits<double>::epsilon();

  RotorSolution sol;
  double v = warm_start >= 0.0 ? warm_start : p.induced_velocity_init;
  bool clamped = false;
  for (int it = 1; it <= kMaxIter; ++it) {
    const double next = (1.0 - kRelax) * v + kRelax * image(v, &clamped);
    sol.iterations = it;
    const bool done = std::abs(next - v) <= 4.0 * eps * std::max(1.0, v);
    v = next;
    if (done) break;
  }

  if (!(residual(v) <= kAccept)) {
    // Fixed point limit-cycled; v - h(v) is negative at 0 and grows without
    // bound, so bracket and bisect.
    sol.used_bisection = true;
    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * v);
    for (int k = 0; k < 200 && hi - image(hi, nullptr) <= 0.0; ++k) hi *= 2.0;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid - image(mid, nullptr) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (hi - lo <= 2.0 * eps * std::max(1.0, hi)) break;
    }
    v = 0.5 * (lo + hi);
  }

  sol.residual = residual(v);
  if (!(sol.residual < 1e-9)) {
    std::ostringstream msg;
    msg << "induced velocity did not converge: last residual " << sol.residual << " at v_im = " << v;
    throw ConvergenceError(msg.str());
  }
  sol.induced_velocity = v;
  sol.thrust = rotor_thrust(air, s.flap_lon, s.flap_lat, collective, v, p);
  image(v, &clamped);
  sol.clamped = clamped;
  return sol;
}

double climb_power(double w_bar, const HelicopterParams& p) {
  return w_bar < 0.0 ? -p.mass * p.gravity * w_bar : 0.0;
}

Vec3 fuselage_drag(const Vec3& velocity, double induced_velocity, const WindVector& wind,
                   const HelicopterParams& p) {
  const Vec3 air = velocity - wind;
  const double vi = std::abs(induced_velocity);
  const double q = 0.5 * p.air_density;
  return {-q * p.drag_area_x * air.x() * std::max(std::abs(air.x()), vi),
          -q * p.drag_area_y * air.y() * std::max(std::abs(air.y()), vi),
          -q * p.drag_area_z * air.z() * std::abs(air.z() - induced_velocity)};
}

Wrench main_rotor_wrench(const VehicleState& s, double thrust, double induced_velocity,
                         const WindVector& wind, const HelicopterParams& p) {
  const double a = s.flap_lon;
  const double b = s.flap_lat;
  const Vec3 air = s.velocity - wind;
  const Vec3 fus = fuselage_drag(s.velocity, induced_velocity, wind, p);
  const double R = p.rotor_radius;
  const double tip = p.rotor_speed * R;

  Wrench w;
  w.force = {-thrust * std::sin(a), thrust * std::sin(b), -thrust * std::cos(a) * std::cos(b)};
  const double hinge = p.rotor_spring + thrust * p.hub_height;

  // The bracket sums power terms; dividing by rotor speed gives shaft torque.
  const double profile = p.air_density * R * R * p.blade_count * p.blade_chord /
                         p.profile_torque_divisor *
                         (tip * tip + p.profile_speed_factor * (air.x() * air.x() + air.y() * air.y()));
  const double power = profile + thrust * induced_velocity + std::abs(fus.x() * air.x()) +
                       std::abs(fus.y() * air.y()) +
                       std::abs(fus.z() * (air.z() - induced_velocity)) + climb_power(air.z(), p);
  w.moment = {hinge * std::sin(b), hinge * std::sin(a), -power / p.rotor_speed};
  return w;
}

double gyro_output(double yaw_rate, double pedal, double gyro_integral, const HelicopterParams& p) {
  return p.gyro_kp * (p.gyro_amp * pedal - yaw_rate) + p.gyro_ki * gyro_integral;
}

double yaw_gyro_derivative(double yaw_rate, double pedal, const HelicopterParams& p) {
  return p.gyro_amp * pedal - yaw_rate;
}

Wrench tail_rotor_wrench(double tail_command, const HelicopterParams& p) {
  const double t = p.tail_thrust_gain * tail_command;
  return {Vec3(0.0, -t, 0.0), Vec3(t * p.tail_roll_arm, 0.0, t * p.tail_yaw_arm)};
}

FlapRates flapping_derivatives(const VehicleState& s, double lat, double lon,
                               const HelicopterParams& p) {
  // Same expressions as derived_constants(), without re-validating per call.
  const double R = p.rotor_radius;
  const double inv_tau = p.lock_number * p.rotor_speed * (3.0 * R - 8.0 * p.hinge_offset) / (48.0 * R);
  const double coupling = 8.0 * p.rotor_spring /
                          (p.lock_number * p.rotor_speed * p.rotor_speed * p.blade_flap_inertia);
  const RotorConstants rc{1.0 / inv_tau, coupling};
  return {-s.rates.y() - inv_tau * s.flap_lon + rc.flap_coupling * s.flap_lat +
              inv_tau * p.k_lon * lon,
          -s.rates.x() - inv_tau * s.flap_lat - rc.flap_coupling * s.flap_lon +
              inv_tau * p.k_lat * lat};
}

VehicleState state_derivative(const VehicleState& s, const ControlInputs& raw_inputs,
                              const WindVector& wind, const HelicopterParams& p,
                              ForceBreakdown* breakdown) {
  const ControlInputs u = raw_inputs.saturated(p.input_min, p.input_max);
  const Mat3 rb = rotation_matrix(s.euler);
  const Mat3 sb = euler_rate_matrix(s.euler, p.min_cos_pitch);

  ForceBreakdown fb;
  fb.tail_command = gyro_output(s.rates.z(), u.ped, s.gyro_integral, p);
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  if (p.switches.aerodynamics) {
    fb.rotor = induced_velocity_and_thrust(s, u.col, wind, p);
    fb.main_rotor = main_rotor_wrench(s, fb.rotor.thrust, fb.rotor.induced_velocity, wind, p);
    fb.fuselage = fuselage_drag(s.velocity, fb.rotor.induced_velocity, wind, p);
    fb.tail = tail_rotor_wrench(fb.tail_command, p);
    force = fb.main_rotor.force + fb.fuselage + fb.tail.force;
    moment = fb.main_rotor.moment + fb.tail.moment;
  }
  if (p.switches.gravity) {
    const double sf = std::sin(s.euler.x()), cf = std::cos(s.euler.x());
    const double st = std::sin(s.euler.y()), ct = std::cos(s.euler.y());
    fb.gravity = p.mass * p.gravity * Vec3(-st, sf * ct, cf * ct);
  }

  const Mat3 J = p.inertia();
  VehicleState d;
  d.position = rb.transpose() * s.velocity;
  d.velocity = -s.rates.cross(s.velocity) + (force + fb.gravity) / p.mass;
  d.euler = sb * s.rates;
  d.rates = J.diagonal().cwiseInverse().asDiagonal() * (moment - s.rates.cross(J * s.rates));
  const FlapRates flap = flapping_derivatives(s, u.lat, u.lon, p);
  d.flap_lon = flap.lon;
  d.flap_lat = flap.lat;
  d.gyro_integral = yaw_gyro_derivative(s.rates.z(), u.ped, p);

  if (breakdown) *breakdown = fb;
  return d;
}

VehicleState step(const VehicleState& s, const ControlInputs& inputs, const WindVector& wind,
                  double dt, const HelicopterParams& p) {
  if (!(dt > 0.0) || dt > p.max_step * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "integration step " << dt << " s outside (0, " << p.max_step << "]";
    throw IntegrationError(msg.str());
  }
  using V = VehicleState::Vector;
  auto rhs = [&](const V& x) -> V {
    return state_derivative(VehicleState::from_vector(x), inputs, wind, p).to_vector();
  };
  const V next = rk4_step(rhs, s.to_vector(), dt);
  if (!next.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite state after step of " << dt << " s from attitude (" << s.euler.transpose()
        << "), body rates (" << s.rates.transpose() << ")";
    throw IntegrationError(msg.str());
  }
  return VehicleState::from_vector(next);
}

}  // namespace heli
