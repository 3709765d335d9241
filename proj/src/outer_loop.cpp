#include "heli/outer_loop.hpp"

#include "heli/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heli {

namespace {

// North-east-down to north-east-up.
const Vec3 kUp(1.0, 1.0, -1.0);

const char* axis_label(int i) { return i == 0 ? "x" : i == 1 ? "y" : "z"; }

}  // namespace

PerformanceEnvelope PerformanceEnvelope::from(const ControllerParams& c) {
  PerformanceEnvelope env;
  for (int i = 0; i < 3; ++i) {
    const auto& a = c.axes[i];
    env.axes[i] = {a.tau_start, a.tau_final, a.decay_rate, a.position_gain};
  }
  return env;
}

double performance_function(double t, const PerformanceEnvelope& env, int axis) {
  const auto& a = env.axes.at(axis);
  return (a.tau_start - a.tau_final) * std::exp(-a.decay_rate * t) + a.tau_final;
}

Vec3 position_error(const Vec3& position, const Reference& ref) {
  return (ref.position - position).cwiseProduct(kUp);
}

Vec3 velocity_error(const Vec3& velocity_ned, const Reference& ref) {
  return (ref.velocity - velocity_ned).cwiseProduct(kUp);
}

NormalizedErrors normalized_errors(const Measurement& m, const Reference& ref,
                                   const PerformanceEnvelope& env, double t, double guard) {
  NormalizedErrors out;
  out.position_error = position_error(m.position, ref);
  out.velocity_error = velocity_error(m.velocity, ref);
  for (int i = 0; i < 3; ++i) {
    out.combined[i] = out.velocity_error[i] + env.axes[i].position_gain * out.position_error[i];
    out.tau[i] = performance_function(t, env, i);
    out.e[i] = out.combined[i] / out.tau[i];
    out.margin[i] = out.tau[i] - std::abs(out.combined[i]);
  }
  for (int i = 0; i < 3; ++i) {
    if (!(std::abs(out.e[i]) < 1.0 - guard)) {
      std::ostringstream msg;
      msg << "performance envelope left on axis " << axis_label(i) << " at t = " << t
          << " s: |eps_v + m eps_p| = " << std::abs(out.combined[i]) << ", tau = " << out.tau[i];
      throw EnvelopeViolation(msg.str(), i, out.margin[i]);
    }
  }
  return out;
}

ErrorGains ErrorGains::from(const ControllerParams& c) {
  ErrorGains g;
  for (int i = 0; i < 3; ++i) {
    g.k[i] = c.axes[i].k;
    g.p[i] = c.axes[i].p;
  }
  g.integral_limit = c.integral_limit;
  return g;
}

Vec3 error_controller(const Vec3& e, const Vec3& tau, const ErrorGains& gains,
                      OuterLoopState& state, double dt, double heading, double hover_bias) {
  Vec3 barrier;
  for (int i = 0; i < 3; ++i) {
    if (!(std::abs(e[i]) < 1.0)) {
      throw EnvelopeViolation(std::string("tanh^-1 argument outside (-1, 1) on axis ") +
                                  axis_label(i),
                              i, tau[i] * (1.0 - std::abs(e[i])));
    }
    barrier[i] = std::atanh(e[i]);
  }
  if (state.started && !state.saturated && dt > 0.0) {
    state.integral += 0.5 * dt * (barrier + state.last_barrier);
    state.integral = state.integral.cwiseMax(-gains.integral_limit).cwiseMin(gains.integral_limit);
  }
  state.last_barrier = barrier;
  state.last_e = e;
  state.started = true;

  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    // The normalizing factor 1 / (tau (1 - e^2)) is the derivative of tanh^-1(e / tau).
    const double scale = gains.k[i] / (tau[i] * (1.0 - e[i] * e[i]));
    g[i] = scale * (barrier[i] + gains.p[i] * state.integral[i]);
  }
  const double c = std::cos(heading), s = std::sin(heading);
  Vec3 u;
  u.x() = -(c * g.x() + s * g.y());
  u.y() = -(-s * g.x() + c * g.y());
  u.z() = -g.z() - hover_bias;
  return u;
}

Eigen::Vector2d thrust_tilt(const Vec3& u_m) {
  const double n = u_m.norm();
  return {-std::asin(std::clamp(u_m.y() / n, -1.0, 1.0)), -std::atan(u_m.x() / u_m.z())};
}

AttitudeCommand attitude_command(const Vec3& u_m, double heading_ref, double attitude_limit,
                                 double min_norm, const Eigen::Vector4d& previous) {
  AttitudeCommand cmd;
  const double n = u_m.norm();
  if (!(n > min_norm) || !std::isfinite(n) || u_m.z() == 0.0) {
    cmd.r_out = previous;
    cmd.r_out[2] = heading_ref;
    cmd.held = true;
    return cmd;
  }
  const Eigen::Vector2d tilt = thrust_tilt(u_m);
  const double phi = std::clamp(tilt[0], -attitude_limit, attitude_limit);
  const double theta = std::clamp(tilt[1], -attitude_limit, attitude_limit);
  cmd.clamped = phi != tilt[0] || theta != tilt[1];
  cmd.r_out << phi, theta, heading_ref, -n;
  return cmd;
}

Vec3 position_error_dynamics(const VehicleState& s, const ControlInputs& u, const WindVector& wind,
                             const Vec3& reference_acceleration, const HelicopterParams& p) {
  const VehicleState d = state_derivative(s, u, wind, p);
  // Inertial acceleration from body-frame velocity derivatives.
  const Vec3 a_ned = rotation_matrix(s.euler).transpose() * (d.velocity + s.rates.cross(s.velocity));
  return (reference_acceleration - a_ned).cwiseProduct(kUp);
}

std::array<bool, 3> steady_state_admissible(const NormalizedErrors& err,
                                            const PerformanceEnvelope& env) {
  std::array<bool, 3> ok{};
  for (int i = 0; i < 3; ++i) {
    const auto& a = env.axes[i];
    ok[i] = std::abs(err.position_error[i]) <= a.tau_final / a.position_gain * (1.0 + 1e-9) &&
            std::abs(err.velocity_error[i]) <= 2.0 * a.tau_final * (1.0 + 1e-9);
  }
  return ok;
}

OuterLoop::OuterLoop(const ControllerParams& ctrl, double hover_bias)
    : ctrl_(ctrl),
      envelope_(PerformanceEnvelope::from(ctrl)),
      gains_(ErrorGains::from(ctrl)),
      hover_bias_(hover_bias) {
  state_.last_command << 0.0, 0.0, 0.0, -hover_bias;
}

OuterLoop::Output OuterLoop::update(const Measurement& m, const Reference& ref, double t,
                                    double dt) {
  if (!state_.started && ctrl_.auto_tau_start) {
    // Widen the initial envelope so the starting error sits well inside it.
    const Vec3 eps_p = position_error(m.position, ref);
    const Vec3 eps_v = velocity_error(m.velocity, ref);
    for (int i = 0; i < 3; ++i) {
      auto& a = envelope_.axes[i];
      const double c0 = std::abs(eps_v[i] + a.position_gain * eps_p[i]);
      a.tau_start = std::max({a.tau_start, 2.0 * c0 + ctrl_.tau_start_floor, a.tau_final});
    }
  }
  Output out;
  out.errors = normalized_errors(m, ref, envelope_, t, ctrl_.envelope_guard);
  out.u_m = error_controller(out.errors.e, out.errors.tau, gains_, state_, dt, m.heading,
                             hover_bias_);
  out.command = attitude_command(out.u_m, ref.heading, ctrl_.attitude_limit,
                                 ctrl_.min_thrust_command, state_.last_command);
  state_.saturated = out.command.clamped;
  state_.last_command = out.command.r_out;
  state_.t = t;
  for (int i = 0; i < 3; ++i) {
    if (t > 5.0 / envelope_.axes[i].decay_rate) {
      out.steady_state_ok[i] = steady_state_admissible(out.errors, envelope_)[i];
    }
  }
  return out;
}

}  // namespace heli
