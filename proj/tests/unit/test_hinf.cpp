#include "doctest.h"

#include "fixtures.hpp"
#include "heli/check.hpp"
#include "heli/error.hpp"
#include "heli/integrator.hpp"

#include <random>

using namespace heli;
using Eigen::MatrixXd;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

MatrixXd random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

LinearModel toy_model(std::mt19937_64& rng, int n, int m, double e_scale) {
  LinearModel model;
  model.A = random_matrix(rng, n, n);
  model.B = random_matrix(rng, n, m);
  model.E = e_scale * random_matrix(rng, n, 1);
  model.C = MatrixXd::Zero(n + m, n);
  model.C.topRows(n) = MatrixXd::Identity(n, n);
  model.D = MatrixXd::Zero(n + m, m);
  model.D.bottomRows(m) = MatrixXd::Identity(m, m);
  model.C_out = MatrixXd::Identity(m, n);
  model.D_out = MatrixXd::Zero(m, m);
  return model;
}

}  // namespace

TEST_CASE("scalar design: F = -1 and closed loop at -2") {
  LinearModel model;
  model.A = scalar(-1);
  model.B = scalar(1);
  model.E = scalar(0);
  model.C = scalar(1);
  model.D = scalar(1);
  model.C_out = scalar(1);
  model.D_out = scalar(0);
  const GainSet g = synthesize_gains(model, solve_game_riccati(model, 1.0), 1.0);
  CHECK(g.F(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK((model.A + model.B * g.F)(0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("without a disturbance channel the floor is feasible") {
  std::mt19937_64 rng(1);
  const LinearModel model = toy_model(rng, 3, 2, 0.0);
  GammaOptions opt;
  const GammaReport r = select_gamma(model, opt);
  CHECK(r.at_floor);
  CHECK(r.gamma == doctest::Approx(opt.floor * 1.05).epsilon(1e-15));
}

TEST_CASE("doubling the disturbance doubles the attenuation bound") {
  std::mt19937_64 rng(4);
  const LinearModel model = toy_model(rng, 3, 2, 1.0);
  LinearModel doubled = model;
  doubled.E *= 2.0;
  GammaOptions opt;
  opt.tolerance = 1e-7;
  const double g1 = select_gamma(model, opt).infimum;
  const double g2 = select_gamma(doubled, opt).infimum;
  CHECK(g2 / g1 == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("feasibility is monotone in gamma around the bisection result") {
  std::mt19937_64 rng(8);
  const LinearModel model = toy_model(rng, 3, 2, 1.0);
  const double g = select_gamma(model).infimum;
  CHECK(gamma_feasible(model, g * 1.01));
  CHECK(gamma_feasible(model, g * 10.0));
  CHECK_FALSE(gamma_feasible(model, g / 1.01));
  CHECK_FALSE(gamma_feasible(model, g / 10.0));
}

TEST_CASE("tracking gain inverts the DC gain on a square toy system") {
  std::mt19937_64 rng(12);
  LinearModel model = toy_model(rng, 4, 4, 0.3);
  model.C_out = MatrixXd::Identity(4, 4);
  model.D_out = MatrixXd::Zero(4, 4);
  const Synthesis s = synthesize(model, ControllerParams{});
  const MatrixXd closed = model.A + model.B * s.gains.F;
  const MatrixXd dc = -model.C_out * closed.inverse() * model.B * s.gains.G;
  CHECK((dc - MatrixXd::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("frequency sweep") {
  SUBCASE("no disturbance input has zero gain") {
    std::mt19937_64 rng(2);
    const LinearModel model = toy_model(rng, 3, 2, 0.0);
    const Synthesis s = synthesize(model, ControllerParams{});
    CHECK(verify_hinf_norm(model, s.gains).norm == 0.0);
  }
  SUBCASE("first-order lag peaks at one at DC") {
    LinearModel model;
    model.A = scalar(-1);
    model.B = scalar(0);
    model.E = scalar(1);
    model.C = (MatrixXd(2, 1) << 1, 0).finished();
    model.D = (MatrixXd(2, 1) << 0, 1).finished();
    GainSet g;
    g.F = scalar(0);
    g.gamma = 1.0;
    const HinfCertificate c = verify_hinf_norm(model, g);
    CHECK(c.norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.peak_frequency == 0.0);
    CHECK(transfer_gain(model.A, model.E, model.C, 1.0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("helicopter attitude design") {
  const Design& d = default_design();
  const GainSet& g = d.synthesis.gains;

  CHECK(d.synthesis.riccati_residual < 1e-8 * (1.0 + g.P.norm()));
  CHECK(g.gamma > 0.0);
  CHECK(g.closed_loop_spectrum.real().maxCoeff() < -1e-4);

  const HinfCertificate cert = verify_hinf_norm(d.model, g);
  CHECK(cert.norm <= g.gamma * (1.0 + 1e-3));
  CHECK(cert.holds);

  SUBCASE("no deviation and no command returns the trim inputs") {
    const ControlInputs u = attitude_control(Eigen::Matrix<double, 9, 1>::Zero(),
                                             Eigen::Vector4d::Zero(), g);
    CHECK((u.to_vector() - d.model.trim.inputs.to_vector()).norm() == 0.0);
  }
  SUBCASE("the law is affine away from saturation") {
    Eigen::Matrix<double, 9, 1> x1 = Eigen::Matrix<double, 9, 1>::Zero(), x2 = x1;
    x1[lin::kPhi] = 0.01;
    x2[lin::kQ] = -0.02;
    const Eigen::Vector4d r(0.0, 0.01, 0.0, 0.0);
    const Eigen::Vector4d z = Eigen::Vector4d::Zero();
    const Eigen::Vector4d u0 = g.u_trim;
    const Eigen::Vector4d a = attitude_control(x1, z, g).to_vector() - u0;
    const Eigen::Vector4d b = attitude_control(x2, r, g).to_vector() - u0;
    const Eigen::Vector4d ab = attitude_control(x1 + x2, r, g).to_vector() - u0;
    CHECK((ab - a - b).norm() < 1e-14);
  }
  SUBCASE("a roll offset decays like the matrix exponential") {
    const MatrixXd Acl = d.model.A + d.model.B * g.F;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(9);
    x0[lin::kPhi] = 0.1;
    Eigen::VectorXd x = x0;
    const double dt = 1e-3;
    for (int i = 0; i < 5000; ++i) {
      x = rk4_step([&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return Acl * y; }, x, dt);
    }
    const Eigen::VectorXd exact = oracle::expm(Acl, 5.0) * x0;
    CHECK((x - exact).norm() < 1e-8);
    CHECK(std::abs(x[lin::kPhi]) < 0.01);
  }
}
