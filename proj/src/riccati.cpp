#include "heli/riccati.hpp"

#include "heli/error.hpp"

#include <cmath>
#include <sstream>

namespace heli {

namespace {

MatrixXd symmetrize(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

struct Reduced {
  MatrixXd A;     // A - B R^-1 D^T C
  MatrixXd Q;     // C^T (I - D R^-1 D^T) C
  MatrixXd G;     // B R^-1 B^T
  MatrixXd S;     // E E^T / gamma^2
  MatrixXd R;
  MatrixXd Rinv;
};

Reduced reduce(const RiccatiProblem& pr, double gamma) {
  Reduced r;
  r.R = pr.D.transpose() * pr.D;
  Eigen::FullPivLU<MatrixXd> lu(r.R);
  if (!lu.isInvertible()) throw ValidationError("invariant violated: D^T D nonsingular");
  r.Rinv = lu.inverse();
  r.A = pr.A - pr.B * r.Rinv * pr.D.transpose() * pr.C;
  const MatrixXd I = MatrixXd::Identity(pr.C.rows(), pr.C.rows());
  r.Q = symmetrize(pr.C.transpose() * (I - pr.D * r.Rinv * pr.D.transpose()) * pr.C);
  r.G = symmetrize(pr.B * r.Rinv * pr.B.transpose());
  if (pr.E.size() == 0 || std::isinf(gamma)) {
    r.S = MatrixXd::Zero(pr.A.rows(), pr.A.rows());
  } else {
    r.S = symmetrize(pr.E * pr.E.transpose()) / (gamma * gamma);
  }
  return r;
}

MatrixXd reduced_residual(const Reduced& r, const MatrixXd& X) {
  return symmetrize(r.A.transpose() * X + X * r.A + r.Q + X * (r.S - r.G) * X);
}

}  // namespace

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
  const long n = A.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  MatrixXd K(n * n, n * n);
  // vec(A^T X) = (I kron A^T) vec X,  vec(X A) = (A^T kron I) vec X.
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) = I(i, j) * A.transpose() + A(j, i) * I;
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(K);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "Lyapunov operator singular";
    if (std::isfinite(rcond)) {
      msg << " (rcond " << rcond << ")";
    } else {
      msg << " (zero pivot: A has eigenvalues summing to zero)";
    }
    throw ConvergenceError(msg.str());
  }
  const Eigen::VectorXd vq = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  Eigen::VectorXd vx = lu.solve(-vq);
  // One step of iterative refinement.
  vx += lu.solve(-vq - K * vx);
  return symmetrize(Eigen::Map<MatrixXd>(vx.data(), n, n));
}

bool is_hurwitz(const MatrixXd& A, double margin) {
  if (A.size() == 0) return true;
  Eigen::EigenSolver<MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) return false;
  return (es.eigenvalues().real().array() < -margin).all();
}

MatrixXd stabilizing_gain(const MatrixXd& A, const MatrixXd& B) {
  const long n = A.rows();
  if (is_hurwitz(A)) return MatrixXd::Zero(B.cols(), n);
  // Smallest shift keeping -(A + beta I) Hurwitz, plus one. A norm-based shift
  // would also work but yields huge, badly conditioned gains.
  Eigen::EigenSolver<MatrixXd> es(A, false);
  const double beta = std::max(0.0, -es.eigenvalues().real().minCoeff()) + 1.0;
  const MatrixXd shifted = -(A + beta * MatrixXd::Identity(n, n));
  // shifted X + X shifted^T + 2 B B^T = 0, X > 0 when (A, B) is controllable.
  const MatrixXd X = solve_lyapunov(shifted.transpose(), 2.0 * B * B.transpose());
  Eigen::LDLT<MatrixXd> ldlt(X);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, X.norm())) {
    throw InfeasibleError("no stabilizing gain: (A, B) not controllable");
  }
  const MatrixXd K = B.transpose() * ldlt.solve(MatrixXd::Identity(n, n));
  if (!is_hurwitz(A - B * K)) throw InfeasibleError("no stabilizing gain found for (A, B)");
  return K;
}

MatrixXd solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R) {
  const MatrixXd Rinv = R.inverse();
  MatrixXd K = stabilizing_gain(A, B);
  MatrixXd X = MatrixXd::Zero(A.rows(), A.cols());
  for (int it = 0; it < 100; ++it) {
    const MatrixXd Ac = A - B * K;
    const MatrixXd next = solve_lyapunov(Ac, Q + K.transpose() * R * K);
    const double change = (next - X).norm();
    X = next;
    K = Rinv * B.transpose() * X;
    if (change <= 1e-14 * std::max(1.0, X.norm())) break;
  }
  if (!is_hurwitz(A - B * K)) throw InfeasibleError("Kleinman iteration lost stability");
  return X;
}

MatrixXd riccati_residual(const RiccatiProblem& pr, const MatrixXd& P, double gamma) {
  const MatrixXd R = pr.D.transpose() * pr.D;
  const MatrixXd cross = P * pr.B + pr.C.transpose() * pr.D;
  MatrixXd res = P * pr.A + pr.A.transpose() * P + pr.C.transpose() * pr.C -
                 cross * R.ldlt().solve(cross.transpose());
  if (pr.E.size() != 0 && std::isfinite(gamma)) {
    res += P * pr.E * pr.E.transpose() * P / (gamma * gamma);
  }
  return res;
}

GameRiccatiResult solve_game_riccati(const RiccatiProblem& pr, double gamma) {
  if (!(gamma > 0.0)) throw InfeasibleError("gamma must be positive");
  const Reduced r = reduce(pr, gamma);
  const long n = pr.A.rows();
  const double big = 1e12;

  GameRiccatiResult out;
  MatrixXd X = MatrixXd::Zero(n, n);
  MatrixXd Ak = r.A;
  MatrixXd rhs = r.Q;
  try {
    for (int k = 0; k < 500; ++k) {
      const MatrixXd Z = solve_care(Ak, pr.B, rhs, r.R);
      X += Z;
      out.outer_iterations = k + 1;
      if (!X.allFinite() || X.norm() > big) throw InfeasibleError("Riccati iterate diverged");
      Ak = r.A + (r.S - r.G) * X;
      rhs = symmetrize(Z * r.S * Z);
      if (Z.norm() <= 1e-13 * std::max(1.0, X.norm())) break;
    }
    // Newton polish on the full operator.
    for (int k = 0; k < 3; ++k) {
      const MatrixXd Ac = r.A + (r.S - r.G) * X;
      const MatrixXd res = reduced_residual(r, X);
      if (res.norm() <= 1e-15 * std::max(1.0, X.norm())) break;
      X += solve_lyapunov(Ac, res);
    }
  } catch (const InfeasibleError& e) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " infeasible: " << e.what();
    throw InfeasibleError(msg.str());
  } catch (const ConvergenceError& e) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " infeasible: " << e.what();
    throw InfeasibleError(msg.str());
  }

  X = symmetrize(X);
  const MatrixXd closed = r.A + (r.S - r.G) * X;
  if (!is_hurwitz(closed)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " infeasible: solution is not stabilizing";
    throw InfeasibleError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(X);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, X.norm())) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " infeasible: solution indefinite (min eigenvalue "
        << es.eigenvalues().minCoeff() << ")";
    throw InfeasibleError(msg.str());
  }
  out.P = X;
  out.residual = riccati_residual(pr, X, gamma).norm();
  return out;
}

}  // namespace heli
