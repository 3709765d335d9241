#include "heli/hinf.hpp"

#include "heli/error.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace heli {

RiccatiProblem synthesis_problem(const LinearModel& model) {
  RiccatiProblem pr{model.A, model.B, model.E, model.C, model.D};
  if (model.held_input >= 0 && model.held_input < pr.B.cols()) pr.B.col(model.held_input).setZero();
  return pr;
}

MatrixXd solve_game_riccati(const LinearModel& model, double gamma) {
  return solve_game_riccati(synthesis_problem(model), gamma).P;
}

bool gamma_feasible(const LinearModel& model, double gamma) {
  try {
    solve_game_riccati(synthesis_problem(model), gamma);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

GammaOptions gamma_options(const ControllerParams& ctrl) {
  return {ctrl.gamma_floor, ctrl.gamma_max, ctrl.gamma_tolerance, ctrl.gamma_margin};
}

namespace {

void lyapunov_estimate(const LinearModel& model, GammaReport& report) {
  const RiccatiProblem pr = synthesis_problem(model);
  MatrixXd L;
  try {
    L = solve_lyapunov(pr.A, pr.C.transpose() * pr.C);
  } catch (const Error& e) {
    report.lyapunov_note = std::string("L_A undefined: ") + e.what();
    return;
  }
  MatrixXd R;
  try {
    R = solve_game_riccati(pr, std::numeric_limits<double>::infinity()).P;
  } catch (const Error& e) {
    report.lyapunov_note = std::string("R_A undefined: ") + e.what();
    return;
  }
  Eigen::FullPivLU<MatrixXd> lu(R);
  if (!lu.isInvertible()) {
    report.lyapunov_note = "R_A singular";
    return;
  }
  Eigen::EigenSolver<MatrixXd> es(L * lu.inverse(), false);
  const double lmax = es.eigenvalues().real().maxCoeff();
  if (!(lmax > 0.0)) {
    report.lyapunov_note = "lambda_max(L_A R_A^-1) not positive";
    return;
  }
  report.lyapunov_estimate = std::sqrt(lmax);
  report.lyapunov_note = "L_A: A^T L + L A + C^T C = 0; R_A: E = 0 Riccati solution";
}

}  // namespace

GammaReport select_gamma(const LinearModel& model, const GammaOptions& options) {
  GammaReport report;
  lyapunov_estimate(model, report);
  if (gamma_feasible(model, options.floor)) {
    report.at_floor = true;
    report.infimum = options.floor;
    report.gamma = options.floor * options.margin;
    return report;
  }
  if (!gamma_feasible(model, options.max)) {
    std::ostringstream msg;
    msg << "H-infinity synthesis infeasible even at gamma_max = " << options.max;
    throw InfeasibleError(msg.str());
  }
  double lo = options.floor;
  double hi = options.max;
  while (hi / lo > 1.0 + options.tolerance) {
    const double mid = std::sqrt(lo * hi);
    if (gamma_feasible(model, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++report.bisection_steps;
  }
  report.infimum = hi;
  report.gamma = hi * options.margin;
  return report;
}

GainSet synthesize_gains(const LinearModel& model, const MatrixXd& P, double gamma) {
  const RiccatiProblem pr = synthesis_problem(model);
  const MatrixXd R = pr.D.transpose() * pr.D;
  GainSet g;
  g.P = P;
  g.gamma = gamma;
  g.F = -R.ldlt().solve(pr.D.transpose() * pr.C + pr.B.transpose() * P);
  g.u_trim = model.trim.inputs.to_vector();

  const MatrixXd closed = model.A + model.B * g.F;
  Eigen::EigenSolver<MatrixXd> es(closed, false);
  g.closed_loop_spectrum = es.eigenvalues();

  const long outputs = model.C_out.rows();
  const MatrixXd D_out =
      model.D_out.size() ? model.D_out : MatrixXd::Zero(outputs, model.B.cols());
  // Steady state under constant r: x = -(A + B F)^-1 B G r, u = F x + G r.
  const MatrixXd dc = (model.C_out + D_out * g.F) * (-closed.partialPivLu().solve(model.B)) + D_out;
  Eigen::FullPivLU<MatrixXd> lu(dc);
  if (dc.rows() != dc.cols() || !lu.isInvertible() || lu.rcond() < 1e-12) {
    throw Error("uncontrollable output at DC: C_out (A + B F)^-1 B is singular");
  }
  g.G = lu.inverse();
  return g;
}

Synthesis synthesize(const LinearModel& model, const ControllerParams& ctrl) {
  if (!stabilizable(model.A, synthesis_problem(model).B)) {
    throw InfeasibleError("(A, B) is not stabilizable");
  }
  Synthesis s;
  if (ctrl.gamma_override > 0.0) {
    s.gamma.gamma = ctrl.gamma_override;
    s.gamma.infimum = ctrl.gamma_override;
  } else {
    s.gamma = select_gamma(model, gamma_options(ctrl));
  }
  const auto sol = solve_game_riccati(synthesis_problem(model), s.gamma.gamma);
  s.riccati_residual = sol.residual;
  s.gains = synthesize_gains(model, sol.P, s.gamma.gamma);
  return s;
}

ControlInputs attitude_control(const Eigen::Matrix<double, 9, 1>& deviation,
                               const Eigen::Vector4d& r_out, const GainSet& gains,
                               double input_min, double input_max) {
  const Eigen::Vector4d u = gains.u_trim + gains.F * deviation + gains.G * r_out;
  return ControlInputs::from_vector(u).saturated(input_min, input_max);
}

double transfer_gain(const MatrixXd& A, const MatrixXd& E, const MatrixXd& C, double omega) {
  using Cplx = std::complex<double>;
  const long n = A.rows();
  const Eigen::MatrixXcd M =
      Cplx(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - A.cast<Cplx>();
  const Eigen::MatrixXcd X = M.partialPivLu().solve(E.cast<Cplx>());
  const Eigen::MatrixXcd T = C.cast<Cplx>() * X;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

HinfCertificate verify_hinf_norm(const LinearModel& model, const GainSet& gains,
                                 const SweepOptions& options) {
  const RiccatiProblem pr = synthesis_problem(model);
  const MatrixXd Acl = pr.A + pr.B * gains.F;
  const MatrixXd Ccl = pr.C + pr.D * gains.F;
  HinfCertificate cert;
  cert.gamma = gains.gamma;
  if (!is_hurwitz(Acl)) throw Error("closed loop is not stable; H-infinity norm undefined");
  if (pr.E.size() == 0 || pr.E.norm() == 0.0) {
    cert.holds = true;
    return cert;
  }

  auto gain_at_log = [&](double lw) { return transfer_gain(Acl, pr.E, Ccl, std::exp(lw)); };
  cert.norm = transfer_gain(Acl, pr.E, Ccl, 0.0);
  const double l0 = std::log(options.min_frequency);
  const double l1 = std::log(options.max_frequency);
  const int n = std::max(options.points, 2);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double lw = l0 + (l1 - l0) * i / (n - 1);
    const double g = gain_at_log(lw);
    if (g > cert.norm) {
      cert.norm = g;
      cert.peak_frequency = std::exp(lw);
      best = i;
    }
  }
  if (best >= 0) {
    const double step = (l1 - l0) / (n - 1);
    double a = l0 + step * std::max(best - 1, 0);
    double b = l0 + step * std::min(best + 1, n - 1);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = gain_at_log(c), fd = gain_at_log(d);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = gain_at_log(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = gain_at_log(d);
      }
    }
    const double lw = 0.5 * (a + b);
    const double g = gain_at_log(lw);
    if (g > cert.norm) {
      cert.norm = g;
      cert.peak_frequency = std::exp(lw);
    }
  }
  cert.holds = cert.norm <= cert.gamma * (1.0 + 1e-3);
  return cert;
}

}  // namespace heli
