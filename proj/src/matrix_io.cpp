#include "heli/matrix_io.hpp"

#include "heli/error.hpp"
#include "heli/params.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace heli {

const Eigen::MatrixXd& MatrixBundle::get(const std::string& name) const {
  for (const auto& [n, m] : entries) {
    if (n == name) return m;
  }
  throw ParseError("matrix '" + name + "' missing from file");
}

bool MatrixBundle::has(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.first == name) return true;
  }
  return false;
}

void write_matrices(std::ostream& out, const MatrixBundle& bundle) {
  out << "# heli matrix file: \"<name> <rows> <cols>\" then row-major values\n";
  for (const auto& [name, m] : bundle.entries) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (long i = 0; i < m.rows(); ++i) {
      for (long j = 0; j < m.cols(); ++j) {
        if (j) out << ' ';
        out << format_exact(m(i, j));
      }
      out << '\n';
    }
  }
}

MatrixBundle read_matrices(std::istream& in, const std::string& origin) {
  MatrixBundle bundle;
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::string& l) {
    while (std::getline(in, l)) {
      ++lineno;
      const auto first = l.find_first_not_of(" \t\r");
      if (first == std::string::npos || l[first] == '#') continue;
      return true;
    }
    return false;
  };
  while (next_line(line)) {
    std::istringstream hdr(line);
    std::string name;
    long rows = -1, cols = -1;
    if (!(hdr >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": bad matrix header '" + line + "'");
    }
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      if (!next_line(line)) {
        throw ParseError(origin + ": matrix '" + name + "' truncated");
      }
      std::istringstream row(line);
      for (long j = 0; j < cols; ++j) {
        std::string tok;
        if (!(row >> tok)) {
          throw ParseError(origin + ":" + std::to_string(lineno) + ": row of '" + name +
                           "' has fewer than " + std::to_string(cols) + " values");
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          throw ParseError(origin + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
        }
        m(i, j) = v;
      }
    }
    bundle.add(name, m);
  }
  return bundle;
}

MatrixBundle load_matrices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("file not found: '" + path + "'");
  return read_matrices(in, path);
}

void save_matrices(const std::string& path, const MatrixBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrices(out, bundle);
}

MatrixBundle model_bundle(const LinearModel& m) {
  MatrixBundle b;
  b.add("A", m.A);
  b.add("B", m.B);
  b.add("E", m.E);
  b.add("C", m.C);
  b.add("D", m.D);
  b.add("C_out", m.C_out);
  b.add("D_out", m.D_out);
  b.add("A_full", m.A_full);
  b.add("B_full", m.B_full);
  b.add("E_full", m.E_full);
  b.add("x_trim", m.trim.state.to_vector());
  b.add("u_trim", m.trim.inputs.to_vector());
  Eigen::MatrixXd scalars(1, 4);
  scalars << m.collective_gain, m.held_input, m.trim.thrust, m.trim.residual;
  b.add("scalars", scalars);
  return b;
}

LinearModel model_from_bundle(const MatrixBundle& b) {
  LinearModel m;
  m.A = b.get("A");
  m.B = b.get("B");
  m.E = b.get("E");
  m.C = b.get("C");
  m.D = b.get("D");
  m.C_out = b.get("C_out");
  m.D_out = b.get("D_out");
  if (b.has("A_full")) {
    m.A_full = b.get("A_full");
    m.B_full = b.get("B_full");
    m.E_full = b.get("E_full");
  }
  const auto& x = b.get("x_trim");
  const auto& u = b.get("u_trim");
  if (x.size() != VehicleState::kSize || u.size() != 4) throw ParseError("bad trim dimensions");
  m.trim.state = VehicleState::from_vector(Eigen::Map<const VehicleState::Vector>(x.data()));
  m.trim.inputs = ControlInputs::from_vector(Eigen::Map<const Eigen::Vector4d>(u.data()));
  const auto& s = b.get("scalars");
  if (s.size() != 4) throw ParseError("bad scalars block");
  m.collective_gain = s(0);
  m.held_input = static_cast<int>(s(1));
  m.trim.thrust = s(2);
  m.trim.residual = s(3);
  const long n = m.A.rows();
  if (m.A.cols() != n || m.B.rows() != n || m.E.rows() != n || m.C.cols() != n ||
      m.D.rows() != m.C.rows() || m.D.cols() != m.B.cols()) {
    throw ParseError("inconsistent model dimensions");
  }
  return m;
}

MatrixBundle gains_bundle(const GainSet& g, const LinearModel& m) {
  MatrixBundle b;
  Eigen::MatrixXd gamma(1, 1);
  gamma << g.gamma;
  b.add("gamma", gamma);
  b.add("P", g.P);
  b.add("F", g.F);
  b.add("G", g.G);
  Eigen::MatrixXd spec(g.closed_loop_spectrum.size(), 2);
  spec.col(0) = g.closed_loop_spectrum.real();
  spec.col(1) = g.closed_loop_spectrum.imag();
  b.add("spectrum", spec);
  b.add("u_trim", g.u_trim);
  b.add("x_trim", m.trim.state.to_vector());
  Eigen::MatrixXd scalars(1, 2);
  scalars << m.trim.thrust, m.collective_gain;
  b.add("trim_scalars", scalars);
  return b;
}

GainSet gains_from_bundle(const MatrixBundle& b) {
  GainSet g;
  g.gamma = b.get("gamma")(0, 0);
  g.P = b.get("P");
  g.F = b.get("F");
  g.G = b.get("G");
  const auto& spec = b.get("spectrum");
  g.closed_loop_spectrum.resize(spec.rows());
  for (long i = 0; i < spec.rows(); ++i) g.closed_loop_spectrum[i] = {spec(i, 0), spec(i, 1)};
  const auto& u = b.get("u_trim");
  if (u.size() != 4) throw ParseError("bad u_trim");
  g.u_trim = Eigen::Map<const Eigen::Vector4d>(u.data());
  if (g.F.rows() != 4 || g.G.rows() != 4) throw ParseError("gain dimensions must have 4 rows");
  return g;
}

}  // namespace heli
