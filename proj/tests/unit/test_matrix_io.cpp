#include "doctest.h"

#include "fixtures.hpp"
#include "heli/error.hpp"
#include "heli/matrix_io.hpp"

#include <sstream>

using namespace heli;

TEST_CASE("matrix text format round-trips exactly") {
  MatrixBundle b;
  Eigen::MatrixXd a(2, 3);
  a << 1.0 / 3.0, -2e-300, 5.0, 0.1, 1e17, -0.0;
  b.add("A", a);
  b.add("empty", Eigen::MatrixXd(0, 4));
  std::ostringstream out;
  write_matrices(out, b);
  std::istringstream in("# header comment\n" + out.str());
  const MatrixBundle back = read_matrices(in);
  CHECK(back.get("A") == a);
  CHECK(back.get("empty").cols() == 4);
  CHECK_THROWS_AS(back.get("B"), ParseError);
}

TEST_CASE("malformed matrix files") {
  std::istringstream short_rows("A 2 2\n1 2\n");
  CHECK_THROWS_AS(read_matrices(short_rows), ParseError);
  std::istringstream junk("A 1 1\nx\n");
  CHECK_THROWS_AS(read_matrices(junk), ParseError);
  try {
    load_matrices("/nonexistent/model.txt");
    FAIL("expected a missing-file error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("file not found") != std::string::npos);
  }
}

TEST_CASE("model and gains survive a save and reload") {
  const Design& d = default_design();
  const LinearModel m = model_from_bundle(model_bundle(d.model));
  CHECK(m.A == d.model.A);
  CHECK(m.B == d.model.B);
  CHECK(m.E == d.model.E);
  CHECK(m.C_out == d.model.C_out);
  CHECK(m.collective_gain == d.model.collective_gain);
  CHECK(m.trim.state.to_vector() == d.model.trim.state.to_vector());

  const GainSet g = gains_from_bundle(gains_bundle(d.synthesis.gains, d.model));
  CHECK(g.F == d.synthesis.gains.F);
  CHECK(g.G == d.synthesis.gains.G);
  CHECK(g.gamma == d.synthesis.gains.gamma);
  CHECK(g.u_trim == d.synthesis.gains.u_trim);
}
