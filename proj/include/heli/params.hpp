#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace heli {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Toggles used by tests to isolate parts of the force model. Not part of the
/// config file.
struct ModelSwitches {
  bool aerodynamics = true;
  bool gravity = true;
};

/// Physical and aerodynamic constants of the vehicle, SI units throughout.
struct HelicopterParams {
  // Rigid body
  double mass = 7.6;            // [kg]
  double inertia_x = 0.19;      // [kg m^2]
  double inertia_y = 0.46;      // [kg m^2]
  double inertia_z = 0.31;      // [kg m^2]
  double gravity = 9.81;        // [m/s^2]

  // Main rotor
  double rotor_radius = 0.82;           // R [m]
  double rotor_speed = 175.2;           // Omega_mr [rad/s]
  double lock_number = 1.131;           // gamma_mr [-]
  double blade_flap_inertia = 0.0913;   // I_beta [kg m^2]
  double blade_count = 2.0;             // b_mr [-]
  double blade_chord = 0.06;            // c_mr [m]
  double lift_curve_slope = 5.5;        // C_mr [1/rad]
  double air_density = 1.225;           // rho [kg/m^3]
  double k_lat = 0.53;                  // cyclic linkage gains [-]
  double k_lon = 0.54;
  double k_col = 3.77;                  // collective linkage gain [-]
  double rotor_spring = 54.0;           // k_beta [N m/rad]
  double hinge_offset = 0.0;            // e_mr [m]
  double hub_height = 0.25;             // l_hg, hub above CG [m]
  double induced_velocity_init = 3.8;   // v_im,0 [m/s]
  double profile_torque_divisor = 14.0; // N_mr profile term divisor [-]
  double profile_speed_factor = 4.6;    // N_mr advance-speed factor [-]

  // Tail rotor and yaw gyro
  double tail_roll_arm = 0.10;   // l_htr, multiplies T_tr in L_tr [m]
  double tail_yaw_arm = 0.95;    // l_dtr, multiplies T_tr in N_tr [m]
  double tail_thrust_gain = 10.0;  // k_tr [N per unit command]
  double gyro_kp = 0.3;
  double gyro_ki = 1.0;          // [1/s]
  double gyro_amp = 3.0;         // K_a [rad/s per unit pedal]

  // Fuselage effective drag areas [m^2]
  double drag_area_x = 0.10;
  double drag_area_y = 0.22;
  double drag_area_z = 0.15;

  // Actuators and numerics
  double input_min = -1.0;
  double input_max = 1.0;
  double min_cos_pitch = 1e-6;  // Euler-rate singularity guard
  double max_step = 0.002;      // largest accepted integration step [s]

  ModelSwitches switches{};

  Mat3 inertia() const { return Vec3(inertia_x, inertia_y, inertia_z).asDiagonal(); }
  double disk_area() const;
};

/// Per-axis prescribed-performance settings, axis order x, y, z (NED).
struct AxisGains {
  double position_gain;  // m_i [1/s]
  double decay_rate;     // c_i [1/s]
  double tau_start;      // tau_i,0
  double tau_final;      // tau_i,inf
  double k;              // error-controller gain k_i
  double p;              // integral weight p_i [1/s]
};

struct ControllerParams {
  std::array<AxisGains, 3> axes{{
      {1.7, 1.1, 3.0, 0.8, 0.16, 0.3},
      {1.6, 1.1, 3.0, 0.8, 0.13, 0.4},
      {3.5, 1.1, 4.0, 0.6, 0.06, 0.7},
  }};
  bool auto_tau_start = true;   // widen tau_i,0 to fit the initial error
  double tau_start_floor = 0.5;
  double envelope_guard = 1e-6;  // |e_i| must stay below 1 - guard
  double integral_limit = 5.0;   // clamp on each integral accumulator
  double attitude_limit = 0.35;  // |phi_out|, |theta_out| [rad]
  double min_thrust_command = 1e-6;  // ||u_m|| below this holds the last command

  // Diagonal output weights for the H-infinity synthesis:
  // h = C x + D u with C = [diag(state_weights); 0], D = [0; diag(input_weights)].
  std::array<double, 9> state_weights{{4.0, 4.0, 0.6, 0.6, 0.0, 0.0, 0.6, 0.0, 3.0}};
  std::array<double, 4> input_weights{{1.0, 1.0, 1.0, 1.0}};
  double gamma_override = 0.0;  // > 0 pins gamma and skips bisection
  double gamma_floor = 1e-6;
  double gamma_max = 1e6;
  double gamma_tolerance = 1e-3;
  double gamma_margin = 1.05;

  double control_rate = 100.0;  // [Hz]

  Eigen::MatrixXd weight_C() const;
  Eigen::MatrixXd weight_D() const;
};

/// Where a loaded value came from.
struct ProvenanceEntry {
  std::string key;
  std::string value;
  bool from_file = false;
  bool measured = false;  // default is a measured vehicle value rather than an assumption
};

struct LoadedConfig {
  HelicopterParams heli;
  ControllerParams ctrl;
  std::vector<ProvenanceEntry> provenance;

  const ProvenanceEntry* find(const std::string& key) const;
};

/// Parses the key=value format. Missing keys keep their defaults; unknown keys
/// and malformed lines raise ParseError; invariant failures raise ValidationError.
LoadedConfig parse_params(std::istream& in, const std::string& origin = "<stream>");
LoadedConfig load_params(const std::string& path);

/// Writes every key with round-trip exact values.
void write_params(std::ostream& out, const HelicopterParams& heli, const ControllerParams& ctrl);
void write_provenance(std::ostream& out, const LoadedConfig& cfg);

void validate(const HelicopterParams& p);
void validate(const ControllerParams& c);

struct RotorConstants {
  double flap_time_constant;  // tau_mr [s]
  double flap_coupling;       // A_bs; B_bs = -A_bs [1/s]
};

RotorConstants derived_constants(const HelicopterParams& p);

/// Shortest decimal string that parses back to the same double.
std::string format_exact(double v);

}  // namespace heli
