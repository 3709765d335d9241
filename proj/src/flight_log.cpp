#include "heli/flight_log.hpp"

#include "heli/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace heli {

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> names = {
      "t [s]",
      "x [m]", "y [m]", "z [m]", "u [m/s]", "v [m/s]", "w [m/s]",
      "phi [rad]", "theta [rad]", "psi [rad]", "p [rad/s]", "q [rad/s]", "r [rad/s]",
      "a_s [rad]", "b_s [rad]", "gyro_integral [-]",
      "meas_x [m]", "meas_y [m]", "meas_z [m]", "meas_vn [m/s]", "meas_ve [m/s]", "meas_vd [m/s]",
      "meas_phi [rad]", "meas_theta [rad]", "meas_psi [rad]",
      "ref_x [m]", "ref_y [m]", "ref_z [m]", "ref_vn [m/s]", "ref_ve [m/s]", "ref_vd [m/s]",
      "ref_psi [rad]",
      "phi_out [rad]", "theta_out [rad]", "psi_out [rad]", "col_out [g]",
      "u_m_x [g]", "u_m_y [g]", "u_m_z [g]",
      "delta_lat [-]", "delta_lon [-]", "delta_ped [-]", "delta_col [-]",
      "eps_p_x [m]", "eps_p_y [m]", "eps_p_z [m]",
      "eps_v_x [m/s]", "eps_v_y [m/s]", "eps_v_z [m/s]",
      "e_x [-]", "e_y [-]", "e_z [-]",
      "tau_x [m/s]", "tau_y [m/s]", "tau_z [m/s]",
      "margin_x [m/s]", "margin_y [m/s]", "margin_z [m/s]",
      "wind_n [m/s]", "wind_e [m/s]", "wind_d [m/s]", "thrust [N]", "v_im [m/s]",
      "input_saturated [flag]", "attitude_clamped [flag]", "command_held [flag]",
      "envelope_violated [flag]", "grounded [flag]", "steady_state_ok [flag]",
  };
  static_assert(kColumnCount == 69);
  return names;
}

const char* status_name(FlightStatus s) {
  switch (s) {
    case FlightStatus::kCompleted:
      return "completed";
    case FlightStatus::kEnvelopeViolation:
      return "envelope_violation";
    case FlightStatus::kGimbalLock:
      return "gimbal_lock";
    case FlightStatus::kIntegrationFailure:
      return "integration_failure";
  }
  return "unknown";
}

std::vector<double> FlightLog::column(int col) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, col);
  return out;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out << buf;
}

void write_subset(const std::string& path, const FlightLog& log, const std::vector<int>& cols) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const auto& names = log_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << names[cols[j]];
  out << '\n';
  for (std::size_t i = 0; i < log.rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      put(out, log.at(i, cols[j]));
    }
    out << '\n';
  }
}

}  // namespace

void write_csv(std::ostream& out, const FlightLog& log) {
  const auto& names = log_columns();
  for (int j = 0; j < kColumnCount; ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (std::size_t i = 0; i < log.rows(); ++i) {
    for (int j = 0; j < kColumnCount; ++j) {
      if (j) out << ',';
      put(out, log.at(i, j));
    }
    out << '\n';
  }
}

void save_csv(const std::string& path, const FlightLog& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_csv(out, log);
}

std::vector<std::string> write_plot_bundles(const std::string& dir, const FlightLog& log,
                                            const std::string& stem) {
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / stem).string();
  const std::vector<std::pair<std::string, std::vector<int>>> bundles = {
      {"_attitude.csv", {kT, kPhi, kTheta, kPsi, kPhiOut, kThetaOut, kPsiOut, kMeasPhi, kMeasTheta,
                         kMeasPsi}},
      {"_rates.csv", {kT, kRateP, kRateQ, kRateR, kFlapLon, kFlapLat}},
      {"_controls.csv", {kT, kLat, kLon, kPed, kCol, kColOut, kUmX, kUmY, kUmZ}},
      {"_path.csv", {kT, kPosX, kPosY, kPosZ, kRefX, kRefY, kRefZ, kWindN, kWindE, kWindD}},
  };
  std::vector<std::string> written;
  for (const auto& [suffix, cols] : bundles) {
    written.push_back(base + suffix);
    write_subset(written.back(), log, cols);
  }
  return written;
}

}  // namespace heli
