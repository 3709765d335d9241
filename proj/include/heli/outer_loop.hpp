#pragma once

#include "heli/dynamics.hpp"
#include "heli/params.hpp"

#include <Eigen/Dense>

#include <array>

namespace heli {

struct AxisEnvelope {
  double tau_start;      // tau_i,0
  double tau_final;      // tau_i,inf
  double decay_rate;     // c_i [1/s]
  double position_gain;  // m_i [1/s]
};

/// Per-axis decaying bounds on the combined error eps_v + m eps_p.
struct PerformanceEnvelope {
  std::array<AxisEnvelope, 3> axes;

  static PerformanceEnvelope from(const ControllerParams& c);
};

/// tau_i(t) = (tau_i,0 - tau_i,inf) exp(-c_i t) + tau_i,inf.
double performance_function(double t, const PerformanceEnvelope& env, int axis);

/// Desired motion. Position and velocity are NED; acceleration NED.
struct Reference {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double heading = 0.0;
};

/// Position, NED velocity and heading as seen by the controller.
struct Measurement {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double heading = 0.0;
};

/// Errors are reference minus actual, expressed north-east-up: the vertical
/// component is a height error.
Vec3 position_error(const Vec3& position, const Reference& ref);
Vec3 velocity_error(const Vec3& velocity_ned, const Reference& ref);

struct NormalizedErrors {
  Vec3 position_error = Vec3::Zero();  // eps_p
  Vec3 velocity_error = Vec3::Zero();  // eps_v
  Vec3 combined = Vec3::Zero();        // eps_v + m eps_p
  Vec3 tau = Vec3::Zero();             // tau_i(t)
  Vec3 e = Vec3::Zero();               // combined / tau
  Vec3 margin = Vec3::Zero();          // tau - |combined|
};

/// e_i = (eps_vi + m_i eps_pi) / tau_i(t). Throws EnvelopeViolation when
/// |e_i| >= 1 - guard.
NormalizedErrors normalized_errors(const Measurement& m, const Reference& ref,
                                   const PerformanceEnvelope& env, double t, double guard = 1e-6);

struct ErrorGains {
  std::array<double, 3> k{{0.16, 0.13, 0.06}};
  std::array<double, 3> p{{0.3, 0.4, 0.7}};
  double integral_limit = 5.0;

  static ErrorGains from(const ControllerParams& c);
};

struct OuterLoopState {
  Vec3 integral = Vec3::Zero();       // integral of tanh^-1(e_i) dt
  Vec3 last_barrier = Vec3::Zero();   // tanh^-1(e_i) at the previous update
  Vec3 last_e = Vec3::Zero();
  double t = 0.0;
  bool started = false;
  bool saturated = false;             // previous attitude command was clamped
  Eigen::Vector4d last_command = Eigen::Vector4d::Zero();
};

/// Barrier-transformed PI law u_m = -R K [tanh^-1(e) + p * integral] with the
/// hover bias on the vertical channel. R is the heading rotation by `heading`.
/// Advances the integrals (trapezoidal, frozen while `state.saturated`).
Vec3 error_controller(const Vec3& e, const Vec3& tau, const ErrorGains& gains,
                      OuterLoopState& state, double dt, double heading, double hover_bias);

struct AttitudeCommand {
  Eigen::Vector4d r_out = Eigen::Vector4d::Zero();  // phi_out, theta_out, psi_out, delta_col
  bool clamped = false;
  bool held = false;  // ||u_m|| too small; previous command reused
};

/// Spherical decomposition of u_m without limits.
Eigen::Vector2d thrust_tilt(const Vec3& u_m);

AttitudeCommand attitude_command(const Vec3& u_m, double heading_ref, double attitude_limit,
                                 double min_norm, const Eigen::Vector4d& previous);

/// d/dt of the velocity error along the nonlinear dynamics.
Vec3 position_error_dynamics(const VehicleState& s, const ControlInputs& u, const WindVector& wind,
                             const Vec3& reference_acceleration, const HelicopterParams& p);

/// Steady-state admissibility (|eps_p| <= tau_inf/m, |eps_v| <= 2 tau_inf) per axis.
std::array<bool, 3> steady_state_admissible(const NormalizedErrors& err,
                                            const PerformanceEnvelope& env);

/// The complete position loop, producing r_out for the attitude controller.
class OuterLoop {
 public:
  OuterLoop(const ControllerParams& ctrl, double hover_bias);

  struct Output {
    AttitudeCommand command;
    Vec3 u_m = Vec3::Zero();
    NormalizedErrors errors;
    std::array<bool, 3> steady_state_ok{{true, true, true}};
  };

  /// One control update at time t (seconds since the loop started).
  Output update(const Measurement& m, const Reference& ref, double t, double dt);

  const OuterLoopState& state() const { return state_; }
  const PerformanceEnvelope& envelope() const { return envelope_; }
  double hover_bias() const { return hover_bias_; }

 private:
  ControllerParams ctrl_;
  PerformanceEnvelope envelope_;
  ErrorGains gains_;
  OuterLoopState state_;
  double hover_bias_;
};

}  // namespace heli
