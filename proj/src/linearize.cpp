#include "heli/linearize.hpp"

#include "heli/error.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace heli {

namespace {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

// Trim unknowns: phi, theta, a_s, b_s, lat, lon, ped, col, gyro integrator.
struct TrimUnknowns {
  static void apply(const Vec9& y, const HoverTarget& target, VehicleState& s, ControlInputs& u) {
    s = VehicleState{};
    s.position = target.position;
    s.euler = Vec3(y[0], y[1], target.heading);
    s.flap_lon = y[2];
    s.flap_lat = y[3];
    s.gyro_integral = y[8];
    u = {y[4], y[5], y[6], y[7]};
  }
};

Vec9 trim_residual(const Vec9& y, const HoverTarget& target, const HelicopterParams& p) {
  VehicleState s;
  ControlInputs u;
  TrimUnknowns::apply(y, target, s, u);
  const VehicleState d = state_derivative(s, u, Vec3::Zero(), p);
  Vec9 r;
  r << d.velocity, d.rates, d.flap_lon, d.flap_lat, d.gyro_integral;
  return r;
}

Mat9 trim_jacobian(const Vec9& y, const HoverTarget& target, const HelicopterParams& p) {
  Mat9 J;
  for (int j = 0; j < 9; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(y[j]));
    Vec9 yp = y, ym = y;
    yp[j] += h;
    ym[j] -= h;
    J.col(j) = (trim_residual(yp, target, p) - trim_residual(ym, target, p)) / (2.0 * h);
  }
  return J;
}

double full_derivative_norm(const VehicleState& s, const ControlInputs& u, const HelicopterParams& p) {
  return state_derivative(s, u, Vec3::Zero(), p).to_vector().norm();
}

double state_step(int index, const JacobianSteps& st) {
  switch (index) {
    case VehicleState::kX:
    case VehicleState::kY:
    case VehicleState::kZ:
      return st.position;
    case VehicleState::kU:
    case VehicleState::kV:
    case VehicleState::kW:
      return st.velocity;
    case VehicleState::kPhi:
    case VehicleState::kTheta:
    case VehicleState::kPsi:
      return st.angle;
    case VehicleState::kP:
    case VehicleState::kQ:
    case VehicleState::kR:
      return st.rate;
    case VehicleState::kFlapLon:
    case VehicleState::kFlapLat:
      return st.flap;
    default:
      return st.gyro;
  }
}

using Vec15 = VehicleState::Vector;

// Central difference of f at step h and 2h; returns the h estimate and appends
// a warning for every entry where the two disagree.
template <typename F>
Vec15 checked_column(const F& f, double h, double tol, const std::string& label,
                     std::vector<std::string>& warnings) {
  const Vec15 d1 = (f(h) - f(-h)) / (2.0 * h);
  const Vec15 d2 = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
  const double scale = std::max(d1.cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < d1.size(); ++i) {
    const double ref = std::max(std::abs(d1[i]), 1e-3 * scale);
    if (std::abs(d1[i] - d2[i]) > tol * ref + 1e-10) {
      std::ostringstream msg;
      msg << "Richardson mismatch d(row " << i << ")/d(" << label << "): h -> " << d1[i]
          << ", 2h -> " << d2[i];
      warnings.push_back(msg.str());
    }
  }
  return d1;
}

}  // namespace

TrimPoint find_trim(const HelicopterParams& p, const HoverTarget& target, const TrimOptions& options) {
  validate(p);
  Vec9 y = Vec9::Zero();
  {
    // Momentum-theory hover collective as the starting point.
    const double weight = p.mass * p.gravity;
    const double vh = std::sqrt(weight / (2.0 * p.air_density * p.disk_area()));
    const double R = p.rotor_radius;
    const double coeff = p.air_density * p.rotor_speed * R * R * p.lift_curve_slope *
                         p.blade_count * p.blade_chord / 4.0;
    y[7] = (vh + weight / coeff) / ((2.0 / 3.0) * p.rotor_speed * R * p.k_col);
  }

  TrimPoint trim;
  Vec9 r = trim_residual(y, target, p);
  double lambda = 1e-3;
  trim.residual_history.push_back(r.norm());
  int it = 0;
  for (; it < options.max_iterations && r.norm() > 1e-13; ++it) {
    const Mat9 J = trim_jacobian(y, target, p);
    const Mat9 JtJ = J.transpose() * J;
    const Vec9 g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Mat9 M = JtJ;
      M.diagonal() += lambda * (JtJ.diagonal().array() + 1e-12).matrix();
      const Vec9 delta = -M.ldlt().solve(g);
      const Vec9 candidate = y + delta;
      const Vec9 rc = trim_residual(candidate, target, p);
      if (rc.allFinite() && rc.norm() < r.norm()) {
        y = candidate;
        r = rc;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    trim.residual_history.push_back(r.norm());
    if (!improved) break;
  }

  TrimUnknowns::apply(y, target, trim.state, trim.inputs);
  trim.iterations = it;
  trim.residual = full_derivative_norm(trim.state, trim.inputs, p);
  if (!(trim.residual < options.tolerance)) {
    std::ostringstream msg;
    msg << "trim did not converge after " << it << " iterations; residual history:";
    for (double h : trim.residual_history) msg << ' ' << h;
    throw ConvergenceError(msg.str());
  }
  const auto u = trim.inputs.to_vector();
  if ((u.array() < p.input_min).any() || (u.array() > p.input_max).any()) {
    throw ConvergenceError("trim requires saturated inputs");
  }
  if (std::abs(trim.state.euler.x()) >= options.attitude_limit ||
      std::abs(trim.state.euler.y()) >= options.attitude_limit) {
    std::ostringstream msg;
    msg << "trim attitude implausible for hover: phi = " << trim.state.euler.x()
        << ", theta = " << trim.state.euler.y();
    throw ValidationError(msg.str());
  }
  const RotorSolution rotor = induced_velocity_and_thrust(trim.state, trim.inputs.col, Vec3::Zero(), p);
  trim.thrust = rotor.thrust;
  trim.induced_velocity = rotor.induced_velocity;
  return trim;
}

LinearModel jacobians(const TrimPoint& trim, const HelicopterParams& p, const ControllerParams& ctrl,
                      const JacobianSteps& steps) {
  LinearModel m;
  m.trim = trim;
  const Vec15 x0 = trim.state.to_vector();
  const Eigen::Vector4d u0 = trim.inputs.to_vector();
  const Vec3 w0 = Vec3::Zero();
  auto f = [&](const Vec15& x, const Eigen::Vector4d& u, const Vec3& w) {
    return state_derivative(VehicleState::from_vector(x), ControlInputs::from_vector(u), w, p)
        .to_vector();
  };
  const double tol = steps.richardson_tolerance;
  static const char* state_names[] = {"x", "y", "z", "u", "v", "w", "phi", "theta",
                                      "psi", "p", "q", "r", "a_s", "b_s", "gyro"};
  static const char* input_names[] = {"lat", "lon", "ped", "col"};
  static const char* wind_names[] = {"u_wind", "v_wind", "w_wind"};

  m.A_full.resize(VehicleState::kSize, VehicleState::kSize);
  for (int j = 0; j < VehicleState::kSize; ++j) {
    auto fj = [&](double h) {
      Vec15 x = x0;
      x[j] += h;
      return f(x, u0, w0);
    };
    m.A_full.col(j) = checked_column(fj, state_step(j, steps), tol, state_names[j], m.warnings);
  }
  m.B_full.resize(VehicleState::kSize, 4);
  for (int j = 0; j < 4; ++j) {
    auto fj = [&](double h) {
      Eigen::Vector4d u = u0;
      u[j] += h;
      return f(x0, u, w0);
    };
    m.B_full.col(j) = checked_column(fj, steps.input, tol, input_names[j], m.warnings);
  }
  m.E_full.resize(VehicleState::kSize, 3);
  for (int j = 0; j < 3; ++j) {
    auto fj = [&](double h) {
      Vec3 w = w0;
      w[j] += h;
      return f(x0, u0, w);
    };
    m.E_full.col(j) = checked_column(fj, steps.wind, tol, wind_names[j], m.warnings);
  }

  m.A.resize(9, 9);
  m.B.resize(9, 4);
  m.E.resize(9, 3);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) m.A(i, j) = m.A_full(kAttitudeStates[i], kAttitudeStates[j]);
    m.B.row(i) = m.B_full.row(kAttitudeStates[i]);
    m.E.row(i) = m.E_full.row(kAttitudeStates[i]);
  }
  m.collective_gain = -m.B_full(VehicleState::kW, lin::kCol) / p.gravity;
  m.held_input = lin::kCol;
  set_weights(m, ctrl);
  set_tracking_output(m);
  return m;
}

void set_tracking_output(LinearModel& m) {
  m.C_out = Eigen::MatrixXd::Zero(4, 9);
  m.C_out(0, lin::kPhi) = 1.0;
  m.C_out(1, lin::kTheta) = 1.0;
  m.C_out(2, lin::kPsi) = 1.0;
  // The collective channel reports minus the thrust change in units of g, the
  // sign convention of the commanded collective.
  m.D_out = Eigen::MatrixXd::Zero(4, 4);
  m.D_out(3, lin::kCol) = -m.collective_gain;
}

void set_weights(LinearModel& m, const ControllerParams& ctrl) {
  m.C = ctrl.weight_C();
  m.D = ctrl.weight_D();
}

bool stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
  const long n = A.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  for (long k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()[k];
    if (lambda.real() < 0.0) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() -
                      lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const double scale = std::max(1.0, svd.singularValues()(0));
    if (svd.singularValues()(n - 1) <= tol * scale) return false;
  }
  return true;
}

}  // namespace heli
