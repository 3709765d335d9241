#include "heli/reference.hpp"

#include "heli/error.hpp"

#include <cmath>
#include <numbers>

namespace heli {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

TrapezoidProfile::TrapezoidProfile(double distance, double max_speed, double max_accel)
    : distance_(distance) {
  if (!(max_speed > 0.0) || !(max_accel > 0.0)) {
    throw ValidationError("motion limits must be positive");
  }
  const double d = std::abs(distance);
  if (d == 0.0) return;
  accel_ = max_accel;
  if (d * max_accel <= max_speed * max_speed) {
    // Triangular: never reaches the speed limit.
    ramp_ = std::sqrt(d / max_accel);
    speed_ = max_accel * ramp_;
    duration_ = 2.0 * ramp_;
  } else {
    speed_ = max_speed;
    ramp_ = max_speed / max_accel;
    duration_ = 2.0 * ramp_ + (d - max_speed * ramp_) / max_speed;
  }
}

Eigen::Vector3d TrapezoidProfile::at(double t) const {
  const double sign = distance_ < 0.0 ? -1.0 : 1.0;
  const double d = std::abs(distance_);
  Eigen::Vector3d out;
  if (duration_ == 0.0 || t >= duration_) {
    out << d, 0.0, 0.0;
  } else if (t <= 0.0) {
    out.setZero();
  } else if (t < ramp_) {
    out << 0.5 * accel_ * t * t, accel_ * t, accel_;
  } else if (t <= duration_ - ramp_) {
    out << 0.5 * accel_ * ramp_ * ramp_ + speed_ * (t - ramp_), speed_, 0.0;
  } else {
    const double r = duration_ - t;
    out << d - 0.5 * accel_ * r * r, accel_ * r, -accel_;
  }
  return sign * out;
}

WaypointReference::WaypointReference(const Vec3& start, double start_heading, double start_delay,
                                     const std::vector<Waypoint>& waypoints,
                                     const MotionLimits& limits)
    : start_(start), start_heading_(start_heading), start_delay_(start_delay) {
  Vec3 from = start;
  double heading = start_heading;
  double t = start_delay;
  for (const auto& wp : waypoints) {
    if (!wp.position.allFinite() || !std::isfinite(wp.heading) || !(wp.hold >= 0.0)) {
      throw ValidationError("waypoints must be finite with non-negative holds");
    }
    Leg leg;
    leg.start = t;
    leg.from = from;
    leg.to = wp.position;
    leg.heading_from = heading;
    leg.heading_to = heading + wrap_angle(wp.heading - heading);
    leg.translation = TrapezoidProfile((wp.position - from).norm(), limits.speed, limits.accel);
    leg.turn = TrapezoidProfile(leg.heading_to - leg.heading_from, limits.yaw_rate, limits.yaw_accel);
    leg.arrive = t + std::max(leg.translation.duration(), leg.turn.duration());
    leg.end = leg.arrive + wp.hold;
    legs_.push_back(leg);
    from = wp.position;
    heading = leg.heading_to;
    t = leg.end;
  }
}

Reference WaypointReference::at(double t) const {
  Reference r;
  r.position = start_;
  r.heading = start_heading_;
  for (const auto& leg : legs_) {
    if (t < leg.start) break;
    const double tau = t - leg.start;
    const Vec3 delta = leg.to - leg.from;
    const double length = delta.norm();
    if (length > 0.0) {
      const Vec3 dir = delta / length;
      const Eigen::Vector3d s = leg.translation.at(tau);
      r.position = leg.from + s[0] * dir;
      r.velocity = s[1] * dir;
      r.acceleration = s[2] * dir;
    } else {
      r.position = leg.to;
      r.velocity.setZero();
      r.acceleration.setZero();
    }
    r.heading = leg.heading_from + leg.turn.at(tau)[0];
  }
  return r;
}

}  // namespace heli
