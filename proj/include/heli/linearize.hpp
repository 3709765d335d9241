#pragma once

#include "heli/dynamics.hpp"
#include "heli/params.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace heli {

/// Attitude-model state ordering: phi, theta, p, q, a_s, b_s, r, gyro, psi.
/// The gyro slot carries the integrator of the yaw-gyro PI loop.
inline constexpr std::array<int, 9> kAttitudeStates = {
    VehicleState::kPhi,     VehicleState::kTheta,   VehicleState::kP,
    VehicleState::kQ,       VehicleState::kFlapLon, VehicleState::kFlapLat,
    VehicleState::kR,       VehicleState::kGyro,    VehicleState::kPsi};

namespace lin {
enum : int { kPhi = 0, kTheta, kP, kQ, kFlapLon, kFlapLat, kR, kGyro, kPsi };
enum : int { kLat = 0, kLon, kPed, kCol };
}  // namespace lin

struct HoverTarget {
  Vec3 position = Vec3::Zero();  // NED [m]
  double heading = 0.0;          // [rad]
};

struct TrimPoint {
  VehicleState state;
  ControlInputs inputs;
  double residual = 0.0;  // ||state_derivative|| at the trim
  double thrust = 0.0;    // main-rotor thrust at the trim [N]
  double induced_velocity = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

struct TrimOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
  double attitude_limit = 0.2;  // hover plausibility bound on |phi|, |theta|
};

/// Damped least-squares hover trim over (phi, theta, a_s, b_s, inputs, gyro
/// integrator) with zero body velocity and rates. Throws ConvergenceError
/// carrying the residual history when the tolerance is not met.
TrimPoint find_trim(const HelicopterParams& p, const HoverTarget& target = {},
                    const TrimOptions& options = {});

/// Perturbation sizes for the central differences.
struct JacobianSteps {
  double position = 1e-4;  // m
  double velocity = 1e-4;  // m/s
  double angle = 1e-5;     // rad
  double rate = 1e-5;      // rad/s
  double flap = 1e-5;      // rad
  double gyro = 1e-5;
  double input = 1e-5;
  double wind = 1e-4;      // m/s
  double richardson_tolerance = 1e-4;
};

struct LinearModel {
  // Full 15-state linearization about the trim.
  Eigen::MatrixXd A_full, B_full, E_full;
  // Attitude model in kAttitudeStates ordering.
  Eigen::MatrixXd A, B, E;
  // Synthesis output weights h = C x + D u.
  Eigen::MatrixXd C, D;
  // Tracked output h_out = C_out x + D_out u (phi, theta, psi, collective channel).
  Eigen::MatrixXd C_out, D_out;
  TrimPoint trim;
  // Upward specific force per unit collective, in units of g.
  double collective_gain = 0.0;
  // Input column left out of the synthesis (-1: none). The attitude design
  // does not use the collective.
  int held_input = -1;
  std::vector<std::string> warnings;
};

/// Central-difference Jacobians with a Richardson (h vs 2h) consistency check;
/// entries that disagree beyond the tolerance are listed in `warnings`.
LinearModel jacobians(const TrimPoint& trim, const HelicopterParams& p,
                      const ControllerParams& ctrl, const JacobianSteps& steps = {});

/// Sets C_out / D_out for the collective gain stored in the model.
void set_tracking_output(LinearModel& model);

/// Rebuilds the synthesis weights from the controller configuration.
void set_weights(LinearModel& model, const ControllerParams& ctrl);

/// Whether every unstable (Re >= 0) mode of (A, B) is controllable (PBH test).
bool stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-9);

}  // namespace heli
