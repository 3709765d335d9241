#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace heli {

/// Fixed column order of a flight log.
enum Col : int {
  kT = 0,
  // true state
  kPosX, kPosY, kPosZ, kVelU, kVelV, kVelW, kPhi, kTheta, kPsi, kRateP, kRateQ, kRateR,
  kFlapLon, kFlapLat, kGyro,
  // measurement
  kMeasX, kMeasY, kMeasZ, kMeasVn, kMeasVe, kMeasVd, kMeasPhi, kMeasTheta, kMeasPsi,
  // reference
  kRefX, kRefY, kRefZ, kRefVn, kRefVe, kRefVd, kRefPsi,
  // outer-loop output
  kPhiOut, kThetaOut, kPsiOut, kColOut, kUmX, kUmY, kUmZ,
  // servo commands
  kLat, kLon, kPed, kCol,
  // errors and envelope
  kEpsPX, kEpsPY, kEpsPZ, kEpsVX, kEpsVY, kEpsVZ, kEX, kEY, kEZ, kTauX, kTauY, kTauZ,
  kMarginX, kMarginY, kMarginZ,
  // environment
  kWindN, kWindE, kWindD, kThrust, kInducedVelocity,
  // event flags (0/1)
  kInputSaturated, kAttitudeClamped, kCommandHeld, kEnvelopeViolated, kGrounded, kSteadyStateOk,
  kColumnCount
};

/// Header names with units, in column order.
const std::vector<std::string>& log_columns();

enum class FlightStatus { kCompleted, kEnvelopeViolation, kGimbalLock, kIntegrationFailure };

const char* status_name(FlightStatus s);

struct FlightLog {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<double> data;  // row-major, kColumnCount per row
  FlightStatus status = FlightStatus::kCompleted;
  std::string message;
  int violation_axis = -1;
  double touchdown_time = -1.0;

  std::size_t rows() const { return data.size() / kColumnCount; }
  double at(std::size_t row, int col) const { return data[row * kColumnCount + col]; }
  double* append_row() {
    data.resize(data.size() + kColumnCount, 0.0);
    return data.data() + data.size() - kColumnCount;
  }
  std::vector<double> column(int col) const;
};

/// CSV with a header row and 9 significant digits per value.
void write_csv(std::ostream& out, const FlightLog& log);
void save_csv(const std::string& path, const FlightLog& log);

/// Plot-ready subsets: attitudes, body rates, controller outputs, and the 3-D
/// path with wind. Writes <dir>/<stem>_{attitude,rates,controls,path}.csv and
/// returns the paths written.
std::vector<std::string> write_plot_bundles(const std::string& dir, const FlightLog& log,
                                            const std::string& stem = "flight");

}  // namespace heli
