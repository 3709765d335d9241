#pragma once

#include <Eigen/Dense>

namespace heli {

using Eigen::MatrixXd;

/// Solves A^T X + X A + Q = 0 through the vectorized (Kronecker) linear system.
/// Throws ConvergenceError when the operator is singular.
MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q);

bool is_hurwitz(const MatrixXd& A, double margin = 0.0);

/// Gain K with A - B K Hurwitz (zero when A already is; Bass's shifted
/// Lyapunov construction otherwise).
MatrixXd stabilizing_gain(const MatrixXd& A, const MatrixXd& B);

/// Stabilizing solution of A^T X + X A - X B R^-1 B^T X + Q = 0 by
/// Newton-Kleinman iteration.
MatrixXd solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R);

/// Data of the game Riccati equation
///   P A + A^T P + C^T C + P E E^T P / gamma^2
///     - (P B + C^T D)(D^T D)^-1 (D^T C + B^T P) = 0.
struct RiccatiProblem {
  MatrixXd A, B, E, C, D;
};

MatrixXd riccati_residual(const RiccatiProblem& pr, const MatrixXd& P, double gamma);

struct GameRiccatiResult {
  MatrixXd P;
  int outer_iterations = 0;
  double residual = 0.0;  // Frobenius norm of riccati_residual
};

/// Stabilizing positive semidefinite solution. Starts from the E = 0 (LQ)
/// solution and adds the stabilizing solutions of a sequence of standard
/// Riccati equations until the indefinite term is absorbed, then polishes with
/// full Newton steps. Throws InfeasibleError when no stabilizing solution
/// exists at this gamma, ValidationError when D^T D is singular.
GameRiccatiResult solve_game_riccati(const RiccatiProblem& pr, double gamma);

}  // namespace heli
