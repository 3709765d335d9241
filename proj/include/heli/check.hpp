#pragma once

#include "heli/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace heli {

struct CheckResult {
  int id = 0;
  std::string name;
  bool property_holds = false;
  double seconds = 0.0;
  double time_limit = 0.0;  // [s]
  std::string detail;

  bool passed() const { return property_holds && seconds < time_limit; }
};

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  std::uint64_t flight_seed = 42;
  double hold = 60.0;  // hover-scenario hold [s]
  std::vector<int> only;  // empty: every check
};

/// The acceptance property suite. Each entry is one property with its
/// runtime budget; the helicopter design is synthesized inside check 6 and
/// reused by 7 and 8.
std::vector<CheckResult> run_property_suite(const HelicopterParams& heli,
                                            const ControllerParams& ctrl,
                                            const SuiteOptions& options = {});

/// Independent reference computations used by the suite and the tests.
namespace oracle {

/// Stabilizing solution of A^T X + X A - X B R^-1 B^T X + Q = 0 from the
/// stable invariant subspace of the Hamiltonian matrix.
Eigen::MatrixXd care_hamiltonian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// exp(A t) via Eigen's scaling-and-squaring Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& A, double t);

/// Body rates from Euler-angle rates (inverse of the Euler-rate matrix).
Mat3 body_rate_matrix(const Vec3& euler);

/// Unit u_m direction encoded by an attitude command (phi_out, theta_out);
/// valid for commands with u_z < 0.
Vec3 command_direction(double phi, double theta);

}  // namespace oracle

}  // namespace heli
