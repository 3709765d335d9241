#pragma once

#include "heli/outer_loop.hpp"

#include <vector>

namespace heli {

/// Rest-to-rest move over `distance` with bounded speed and acceleration.
class TrapezoidProfile {
 public:
  TrapezoidProfile() = default;
  TrapezoidProfile(double distance, double max_speed, double max_accel);

  double duration() const { return duration_; }
  /// Signed (position, velocity, acceleration) at time t from the start.
  Eigen::Vector3d at(double t) const;

 private:
  double distance_ = 0.0;
  double speed_ = 0.0;  // cruise speed actually reached
  double accel_ = 0.0;
  double ramp_ = 0.0;   // acceleration phase length
  double duration_ = 0.0;
};

struct Waypoint {
  Vec3 position = Vec3::Zero();  // NED [m]
  double heading = 0.0;          // [rad]; reached by the shortest turn
  double hold = 0.0;             // time to stay after arriving [s]
};

struct MotionLimits {
  double speed = 0.15;        // [m/s]
  double accel = 0.1;         // [m/s^2]
  double yaw_rate = 0.35;     // [rad/s]
  double yaw_accel = 0.35;    // [rad/s^2]
};

/// One leg of the waypoint schedule.
struct Leg {
  double start = 0.0;        // move begins
  double arrive = 0.0;       // move (translation and turn) complete
  double end = 0.0;          // hold complete
  Vec3 from = Vec3::Zero();
  Vec3 to = Vec3::Zero();
  double heading_from = 0.0;  // unwrapped
  double heading_to = 0.0;    // unwrapped
  TrapezoidProfile translation;
  TrapezoidProfile turn;
};

/// Piecewise waypoint reference. Translation and turn of a leg start together;
/// headings are unwrapped so the reference is continuous.
class WaypointReference {
 public:
  WaypointReference(const Vec3& start, double start_heading, double start_delay,
                    const std::vector<Waypoint>& waypoints, const MotionLimits& limits);

  Reference at(double t) const;
  const std::vector<Leg>& legs() const { return legs_; }
  double end_time() const { return legs_.empty() ? start_delay_ : legs_.back().end; }

 private:
  Vec3 start_;
  double start_heading_;
  double start_delay_;
  std::vector<Leg> legs_;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace heli
