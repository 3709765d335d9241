#pragma once

#include "heli/hinf.hpp"
#include "heli/linearize.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace heli {

/// Named matrices in file order.
struct MatrixBundle {
  std::vector<std::pair<std::string, Eigen::MatrixXd>> entries;

  void add(const std::string& name, const Eigen::MatrixXd& m) { entries.emplace_back(name, m); }
  /// Throws ParseError when the matrix is missing.
  const Eigen::MatrixXd& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Plain-text matrix format: '#' comment lines, then for each matrix a header
/// line "<name> <rows> <cols>" followed by `rows` lines of row-major values.
/// Values are written with round-trip precision.
void write_matrices(std::ostream& out, const MatrixBundle& bundle);
MatrixBundle read_matrices(std::istream& in, const std::string& origin = "<stream>");
MatrixBundle load_matrices(const std::string& path);
void save_matrices(const std::string& path, const MatrixBundle& bundle);

MatrixBundle model_bundle(const LinearModel& model);
LinearModel model_from_bundle(const MatrixBundle& bundle);

/// Gains plus the trim they were designed at, so a run can pin a frozen controller.
MatrixBundle gains_bundle(const GainSet& gains, const LinearModel& model);
GainSet gains_from_bundle(const MatrixBundle& bundle);

}  // namespace heli
