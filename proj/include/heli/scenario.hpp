#pragma once

#include "heli/flight_log.hpp"
#include "heli/hinf.hpp"
#include "heli/reference.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace heli {

/// Horizontal or vertical gust with linear ramps at both ends.
struct WindSegment {
  double start = 0.0;     // ramp-up begins [s]
  double duration = 0.0;  // from start to the beginning of the ramp-down [s]
  double ramp = 0.0;      // ramp length [s]
  Vec3 direction = Vec3::UnitX();  // NED, normalized on use
  double speed = 0.0;     // [m/s]
};

/// Sum of the segments at time t, NED [m/s].
Vec3 wind_at(const std::vector<WindSegment>& profile, double t);
/// The same wind along the body axes of attitude `euler`.
WindVector body_wind(const std::vector<WindSegment>& profile, double t, const Vec3& euler);

/// One-sigma additive Gaussian sensor noise.
struct NoiseSpec {
  double position = 0.05;        // [m]
  double velocity = 0.05;        // NED [m/s]
  double attitude = 0.1 * 3.14159265358979323846 / 180.0;  // [rad]
  double rate = 0.0;             // [rad/s]
};

/// Complementary filter between the noisy position/velocity fixes and the
/// outer loop: velocity is low-passed, position is propagated with the
/// filtered velocity and pulled toward the fix. Time constants <= 0 pass the
/// raw measurement through.
struct EstimatorSpec {
  double position_time_constant = 0.5;  // [s]
  double velocity_time_constant = 0.1;  // [s]
};

struct Scenario {
  std::string name = "custom";
  Vec3 start_position = Vec3(0.0, 0.0, -0.20);  // NED [m]
  double start_heading = 0.0;                    // [rad]
  double start_delay = 2.0;                      // hover before the first leg [s]
  std::vector<Waypoint> waypoints;
  MotionLimits limits;
  std::vector<WindSegment> wind;
  NoiseSpec noise;
  EstimatorSpec estimator;
  double dt = 0.002;        // dynamics step [s]
  double duration = 0.0;    // 0: reference end plus `tail`
  double tail = 3.0;        // [s]
  std::uint64_t seed = 0;
  bool land = false;               // final leg descends onto the platform
  double platform_height = 0.20;   // [m]
  int hover_leg = -1;              // leg whose hold is scored (-1: longest hold)
  double settle_time = 10.0;       // transient excluded from heading scoring [s]

  double total_duration() const;
  WaypointReference reference() const;
};

void validate(const Scenario& s);

/// Takeoff from the platform height, climb to 0.65 m, turn to 273.5 deg, hold,
/// gust normal to the heading during the hold, then descend and land.
Scenario paper_hover_scenario(std::uint64_t seed = 42, double hold = 60.0);
/// Zero-wind hover at a waypoint.
Scenario hold_scenario(std::uint64_t seed = 42, double hold = 10.0);
/// Looks up a preset by name; empty when unknown.
std::optional<Scenario> named_scenario(const std::string& name, std::uint64_t seed);

/// The synthesized attitude controller with the trim it was designed at.
struct InnerController {
  GainSet gains;
  TrimPoint trim;
};

/// Closed loop: noisy measurement, outer loop at the control rate, H-infinity
/// attitude law every dynamics step, zero-order hold into RK4. Failures end
/// the run with the failing step logged; they are reported in the log status.
FlightLog run_scenario(const Scenario& scenario, const HelicopterParams& heli,
                       const ControllerParams& ctrl, const InnerController& inner);

/// Independent scenarios in parallel, one thread and RNG stream each.
std::vector<FlightLog> run_batch(const std::vector<Scenario>& scenarios,
                                 const HelicopterParams& heli, const ControllerParams& ctrl,
                                 const InnerController& inner);

struct FlightMetrics {
  double hover_rms = 0.0;          // 3-D position error RMS over the scored hold [m]
  double hover_start = 0.0;
  double hover_end = 0.0;
  double heading_error_max = 0.0;  // after the settle time [rad]
  double yaw_overshoot = 0.0;      // fraction of the heading step
  double min_margin = 0.0;         // smallest envelope margin over the run [m/s]
  bool completed = false;
};

FlightMetrics flight_metrics(const Scenario& scenario, const FlightLog& log);

}  // namespace heli
