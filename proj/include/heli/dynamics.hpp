#pragma once

#include "heli/params.hpp"

#include <Eigen/Dense>

namespace heli {

/// Full simulation state. Doubles as its own time derivative.
struct VehicleState {
  Vec3 position = Vec3::Zero();  // NED [m]
  Vec3 velocity = Vec3::Zero();  // body (u, v, w) [m/s]
  Vec3 euler = Vec3::Zero();     // (phi, theta, psi) [rad]
  Vec3 rates = Vec3::Zero();     // body (p, q, r) [rad/s]
  double flap_lon = 0.0;         // a_s [rad]
  double flap_lat = 0.0;         // b_s [rad]
  double gyro_integral = 0.0;    // integrator of the yaw-gyro PI loop

  static constexpr int kSize = 15;
  using Vector = Eigen::Matrix<double, kSize, 1>;

  // Indices into to_vector().
  enum Index : int {
    kX = 0, kY, kZ, kU, kV, kW, kPhi, kTheta, kPsi, kP, kQ, kR, kFlapLon, kFlapLat, kGyro
  };

  Vector to_vector() const;
  static VehicleState from_vector(const Vector& v);
  bool finite() const;
  double altitude() const { return -position.z(); }
};

/// Servo commands in actuator units.
struct ControlInputs {
  double lat = 0.0;
  double lon = 0.0;
  double ped = 0.0;
  double col = 0.0;

  Eigen::Vector4d to_vector() const { return {lat, lon, ped, col}; }
  static ControlInputs from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
  ControlInputs saturated(double lo, double hi) const;
};

/// Wind velocity along the body axes [m/s].
using WindVector = Vec3;

/// NED -> body rotation for a ZYX (yaw, pitch, roll) Euler sequence.
Mat3 rotation_matrix(const Vec3& euler);

/// Maps body rates to Euler-angle rates. Throws SingularityError when
/// |cos(theta)| < min_cos_pitch.
Mat3 euler_rate_matrix(const Vec3& euler, double min_cos_pitch = 1e-6);

struct RotorSolution {
  double thrust = 0.0;            // T [N]
  double induced_velocity = 0.0;  // v_im [m/s]
  double residual = 0.0;          // |v_im - h(v_im)| / max(1, v_im)
  int iterations = 0;
  bool used_bisection = false;
  bool clamped = false;           // inner square root argument clamped at zero
};

/// Thrust for a given induced velocity (clamped at zero).
double rotor_thrust(const Vec3& air_velocity, double flap_lon, double flap_lat, double collective,
                    double induced_velocity, const HelicopterParams& p);

/// Momentum-theory induced velocity for a given thrust.
double momentum_induced_velocity(const Vec3& air_velocity, double thrust, double induced_velocity,
                                 const HelicopterParams& p, bool* clamped = nullptr);

/// Solves the coupled thrust / inflow equations by damped fixed-point iteration
/// with a bisection fallback. `warm_start` < 0 starts from v_im0.
RotorSolution induced_velocity_and_thrust(const VehicleState& s, double collective,
                                          const WindVector& wind, const HelicopterParams& p,
                                          double warm_start = -1.0);

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

/// Climb-power term of the yaw torque: -m g w_bar for w_bar < 0, else 0.
double climb_power(double w_bar, const HelicopterParams& p);

Vec3 fuselage_drag(const Vec3& velocity, double induced_velocity, const WindVector& wind,
                   const HelicopterParams& p);

Wrench main_rotor_wrench(const VehicleState& s, double thrust, double induced_velocity,
                         const WindVector& wind, const HelicopterParams& p);

/// Tail-rotor command after the yaw-gyro PI loop.
double gyro_output(double yaw_rate, double pedal, double gyro_integral, const HelicopterParams& p);
/// d/dt of the gyro integrator.
double yaw_gyro_derivative(double yaw_rate, double pedal, const HelicopterParams& p);

Wrench tail_rotor_wrench(double tail_command, const HelicopterParams& p);

struct FlapRates {
  double lon;  // da_s/dt
  double lat;  // db_s/dt
};

FlapRates flapping_derivatives(const VehicleState& s, double lat, double lon,
                               const HelicopterParams& p);

/// Intermediate quantities of one derivative evaluation, for logging and tests.
struct ForceBreakdown {
  RotorSolution rotor;
  Wrench main_rotor;
  Vec3 fuselage = Vec3::Zero();
  Wrench tail;
  Vec3 gravity = Vec3::Zero();
  double tail_command = 0.0;
};

/// Right-hand side of the nonlinear model. `inputs` are saturated first.
VehicleState state_derivative(const VehicleState& s, const ControlInputs& inputs,
                              const WindVector& wind, const HelicopterParams& p,
                              ForceBreakdown* breakdown = nullptr);

/// One classical RK4 step with inputs and wind held constant.
VehicleState step(const VehicleState& s, const ControlInputs& inputs, const WindVector& wind,
                  double dt, const HelicopterParams& p);

}  // namespace heli
