#pragma once

#include "heli/dynamics.hpp"
#include "heli/linearize.hpp"
#include "heli/riccati.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace heli {

/// Synthesis products of the H-infinity state-feedback law u = F x + G r_out.
struct GainSet {
  MatrixXd P;
  double gamma = 0.0;
  MatrixXd F;  // inputs x states
  MatrixXd G;  // inputs x tracked outputs
  Eigen::VectorXcd closed_loop_spectrum;
  Eigen::Vector4d u_trim = Eigen::Vector4d::Zero();
};

/// Riccati data for a model: the weights, the wind channel, and the input
/// matrix with the held input (collective) removed from the synthesis.
RiccatiProblem synthesis_problem(const LinearModel& model);

/// Stabilizing solution of the game Riccati equation for the model.
MatrixXd solve_game_riccati(const LinearModel& model, double gamma);

bool gamma_feasible(const LinearModel& model, double gamma);

struct GammaReport {
  double gamma = 0.0;       // chosen attenuation level (margin x infimum bound)
  double infimum = 0.0;     // smallest feasible gamma found by bisection
  int bisection_steps = 0;
  bool at_floor = false;    // feasible already at gamma_floor
  // Closed-form estimate sqrt(lambda_max(L_A R_A^-1)); empty when L_A or R_A
  // is not well defined for this model.
  std::optional<double> lyapunov_estimate;
  std::string lyapunov_note;
};

struct GammaOptions {
  double floor = 1e-6;
  double max = 1e6;
  double tolerance = 1e-3;  // relative bracket width
  double margin = 1.05;
};

GammaOptions gamma_options(const ControllerParams& ctrl);

/// Geometric bisection on Riccati feasibility. Throws InfeasibleError when
/// even gamma_max is infeasible.
GammaReport select_gamma(const LinearModel& model, const GammaOptions& options = {});

/// F = -(D^T D)^-1 (D^T C + B^T P) and G inverting the closed-loop DC gain
/// from r_out to h_out = C_out x + D_out u.
GainSet synthesize_gains(const LinearModel& model, const MatrixXd& P, double gamma);

/// Full pipeline: gamma (override or bisection), Riccati, gains.
struct Synthesis {
  GainSet gains;
  GammaReport gamma;
  double riccati_residual = 0.0;
};
Synthesis synthesize(const LinearModel& model, const ControllerParams& ctrl);

/// u = u_trim + F x + G r_out, saturated. `deviation` is in attitude-model
/// ordering, relative to the trim.
ControlInputs attitude_control(const Eigen::Matrix<double, 9, 1>& deviation,
                               const Eigen::Vector4d& r_out, const GainSet& gains,
                               double input_min = -1.0, double input_max = 1.0);

struct HinfCertificate {
  double norm = 0.0;            // sup over frequency of sigma_max
  double peak_frequency = 0.0;  // [rad/s]
  double gamma = 0.0;
  bool holds = false;           // norm <= gamma (1 + 1e-3)
};

struct SweepOptions {
  double min_frequency = 1e-2;
  double max_frequency = 1e3;
  int points = 2000;
};

/// Peak singular value of (C + D F)(jw I - A - B F)^-1 E over a log sweep (plus
/// w = 0) refined by golden-section search.
HinfCertificate verify_hinf_norm(const LinearModel& model, const GainSet& gains,
                                 const SweepOptions& options = {});

/// sigma_max of C (jw I - A)^-1 E, the building block of the sweep.
double transfer_gain(const MatrixXd& A, const MatrixXd& E, const MatrixXd& C, double omega);

}  // namespace heli
