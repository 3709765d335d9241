#include "doctest.h"

#include "heli/check.hpp"
#include "heli/error.hpp"
#include "heli/riccati.hpp"

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

// h = [C x; D u] with no cross term, so the game equation with E = 0 is the
// standard one with Q = C^T C and R = D^T D.
RiccatiProblem random_problem(std::mt19937_64& rng, double e_scale) {
  RiccatiProblem pr;
  pr.A = random_matrix(rng, 3, 3);
  pr.B = random_matrix(rng, 3, 2);
  pr.E = e_scale * random_matrix(rng, 3, 1);
  pr.C = MatrixXd::Zero(5, 3);
  pr.C.topRows(3) = MatrixXd::Identity(3, 3);
  pr.D = MatrixXd::Zero(5, 2);
  pr.D.bottomRows(2) = MatrixXd::Identity(2, 2);
  return pr;
}

}  // namespace

TEST_CASE("Lyapunov solver") {
  std::mt19937_64 rng(11);
  MatrixXd A = random_matrix(rng, 4, 4);
  A -= 5.0 * MatrixXd::Identity(4, 4);
  const MatrixXd Q = MatrixXd::Identity(4, 4);
  const MatrixXd X = solve_lyapunov(A, Q);
  CHECK((A.transpose() * X + X * A + Q).norm() < 1e-12);
}

TEST_CASE("stabilizing gain moves every pole into the left half plane") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd A = random_matrix(rng, 4, 4) + 2.0 * MatrixXd::Identity(4, 4);
    const MatrixXd B = random_matrix(rng, 4, 2);
    const MatrixXd K = stabilizing_gain(A, B);
    CHECK(is_hurwitz(A - B * K));
  }
}

TEST_CASE("standard Riccati agrees with the Hamiltonian eigenvector solution") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd A = random_matrix(rng, 3, 3);
    const MatrixXd B = random_matrix(rng, 3, 2);
    const MatrixXd Q = MatrixXd::Identity(3, 3);
    const MatrixXd R = MatrixXd::Identity(2, 2);
    const MatrixXd X = solve_care(A, B, Q, R);
    CHECK((X - oracle::care_hamiltonian(A, B, Q, R)).norm() < 1e-8);
  }
}

TEST_CASE("scalar game Riccati with no disturbance") {
  // -2P + 1 - (P + 1)^2 = -P^2 - 4P: roots 0 (stabilizing) and -4.
  const RiccatiProblem pr{scalar(-1), scalar(1), scalar(0), scalar(1), scalar(1)};
  for (double gamma : {0.1, 1.0, 100.0}) {
    const GameRiccatiResult r = solve_game_riccati(pr, gamma);
    CHECK(std::abs(r.P(0, 0)) < 1e-12);
  }
  for (double P : {0.5, -4.0, 3.0}) {
    CHECK(riccati_residual(pr, scalar(P), 1.0)(0, 0) == doctest::Approx(-P * P - 4 * P));
  }
}

TEST_CASE("game Riccati with E = 0 is the standard Riccati equation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const RiccatiProblem pr = random_problem(rng, 0.0);
    const MatrixXd P = solve_game_riccati(pr, 1.0).P;
    const MatrixXd X = oracle::care_hamiltonian(pr.A, pr.B, pr.C.transpose() * pr.C,
                                                pr.D.transpose() * pr.D);
    CHECK((P - X).norm() < 1e-8);
  }
}

TEST_CASE("large gamma converges monotonically to the undisturbed solution") {
  std::mt19937_64 rng(99);
  const RiccatiProblem pr = random_problem(rng, 0.05);
  RiccatiProblem lq = pr;
  lq.E.setZero();
  const MatrixXd P_inf = solve_game_riccati(lq, 1.0).P;
  double previous = 1e300;
  for (double gamma : {10.0, 100.0, 1000.0}) {
    const GameRiccatiResult r = solve_game_riccati(pr, gamma);
    CHECK(r.residual < 1e-8 * (1.0 + r.P.norm()));
    const double dist = (r.P - P_inf).norm();
    CHECK(dist < previous);
    previous = dist;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("game Riccati failure modes") {
  const RiccatiProblem pr{scalar(1), scalar(1), scalar(1), scalar(1), scalar(1)};
  CHECK_NOTHROW(solve_game_riccati(pr, 100.0));
  CHECK_THROWS_AS(solve_game_riccati(pr, 0.01), InfeasibleError);

  RiccatiProblem singular = pr;
  singular.D = scalar(0);
  CHECK_THROWS_AS(solve_game_riccati(singular, 100.0), ValidationError);
}
