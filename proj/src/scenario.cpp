#include "heli/scenario.hpp"

#include "heli/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>

namespace heli {

Vec3 wind_at(const std::vector<WindSegment>& profile, double t) {
  Vec3 w = Vec3::Zero();
  for (const auto& seg : profile) {
    const double rel = t - seg.start;
    if (rel <= 0.0 || seg.speed == 0.0) continue;
    double scale;
    if (seg.ramp > 0.0 && rel < seg.ramp) {
      scale = rel / seg.ramp;
    } else if (rel <= seg.duration) {
      scale = 1.0;
    } else if (seg.ramp > 0.0 && rel < seg.duration + seg.ramp) {
      scale = 1.0 - (rel - seg.duration) / seg.ramp;
    } else {
      continue;
    }
    w += scale * seg.speed * seg.direction.normalized();
  }
  return w;
}

WindVector body_wind(const std::vector<WindSegment>& profile, double t, const Vec3& euler) {
  return rotation_matrix(euler) * wind_at(profile, t);
}

double Scenario::total_duration() const {
  if (duration > 0.0) return duration;
  return reference().end_time() + tail;
}

WaypointReference Scenario::reference() const {
  return WaypointReference(start_position, start_heading, start_delay, waypoints, limits);
}

void validate(const Scenario& s) {
  if (!(s.dt > 0.0)) throw ValidationError("scenario dt must be positive");
  if (!s.start_position.allFinite() || !std::isfinite(s.start_heading)) {
    throw ValidationError("scenario start must be finite");
  }
  for (const auto& w : s.wind) {
    if (!(w.speed >= 0.0) || !(w.ramp >= 0.0) || !(w.duration >= 0.0) ||
        !w.direction.allFinite() || w.direction.norm() == 0.0) {
      throw ValidationError("wind segments need speed >= 0, ramp >= 0 and a direction");
    }
  }
  if (s.land && s.waypoints.empty()) throw ValidationError("landing needs a final waypoint");
  (void)s.reference();
}

Scenario paper_hover_scenario(std::uint64_t seed, double hold) {
  constexpr double deg = std::numbers::pi / 180.0;
  Scenario s;
  s.name = "paper_hover";
  s.seed = seed;
  s.start_position = Vec3(0.0, 0.0, -0.20);
  const double heading = 273.5 * deg;
  s.waypoints = {
      {Vec3(0.0, 0.0, -0.65), 0.0, 1.0},
      {Vec3(0.0, 0.0, -0.65), heading, hold},
      // Aim slightly below the platform so touchdown is reached.
      {Vec3(0.0, 0.0, -0.15), heading, 0.0},
  };
  s.land = true;
  s.hover_leg = 1;
  // Gust normal to the hold heading, switched on mid-hold.
  const double across = heading + std::numbers::pi / 2.0;
  s.wind = {{20.0, 15.0, 3.0, Vec3(std::cos(across), std::sin(across), 0.0), 3.0}};
  return s;
}

Scenario hold_scenario(std::uint64_t seed, double hold) {
  Scenario s;
  s.name = "hold";
  s.seed = seed;
  s.start_position = Vec3(0.0, 0.0, -0.65);
  s.start_delay = 0.0;
  s.waypoints = {{Vec3(0.0, 0.0, -0.65), 0.0, hold}};
  s.tail = 0.0;
  s.hover_leg = 0;
  s.settle_time = 0.0;
  return s;
}

std::optional<Scenario> named_scenario(const std::string& name, std::uint64_t seed) {
  if (name == "paper_hover") return paper_hover_scenario(seed);
  if (name == "paper_hover_long") {
    Scenario s = paper_hover_scenario(seed, 20.0 * 60.0);
    s.name = name;
    return s;
  }
  if (name == "hold") return hold_scenario(seed);
  return std::nullopt;
}

namespace {

struct Sensors {
  Vec3 position;
  Vec3 velocity;  // NED
  Vec3 euler;
  Vec3 rates;
};

class NoiseSource {
 public:
  NoiseSource(const NoiseSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

  Sensors measure(const VehicleState& s) {
    Sensors m;
    m.position = s.position + draw(spec_.position);
    m.velocity = rotation_matrix(s.euler).transpose() * s.velocity + draw(spec_.velocity);
    m.euler = s.euler + draw(spec_.attitude);
    m.rates = s.rates + draw(spec_.rate);
    return m;
  }

 private:
  Vec3 draw(double sigma) {
    if (sigma == 0.0) return Vec3::Zero();
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = sigma * normal_(rng_);
    return v;
  }

  NoiseSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

class Estimator {
 public:
  explicit Estimator(const EstimatorSpec& spec) : spec_(spec) {}

  void update(const Vec3& position, const Vec3& velocity, double dt) {
    if (!started_) {
      position_ = position;
      velocity_ = velocity;
      started_ = true;
      return;
    }
    const double tv = spec_.velocity_time_constant;
    const double tp = spec_.position_time_constant;
    velocity_ = tv > 0.0 ? velocity_ + std::min(dt / tv, 1.0) * (velocity - velocity_) : velocity;
    if (tp > 0.0) {
      position_ += velocity_ * dt;
      position_ += std::min(dt / tp, 1.0) * (position - position_);
    } else {
      position_ = position;
    }
  }

  const Vec3& position() const { return position_; }
  const Vec3& velocity() const { return velocity_; }

 private:
  EstimatorSpec spec_;
  bool started_ = false;
  Vec3 position_ = Vec3::Zero();
  Vec3 velocity_ = Vec3::Zero();
};

}  // namespace

FlightLog run_scenario(const Scenario& sc, const HelicopterParams& heli,
                       const ControllerParams& ctrl, const InnerController& inner) {
  validate(sc);
  validate(ctrl);
  const int ratio = static_cast<int>(std::lround(1.0 / (ctrl.control_rate * sc.dt)));
  if (ratio < 1 || std::abs(ratio * sc.dt * ctrl.control_rate - 1.0) > 1e-9) {
    throw ValidationError("control period must be an integer multiple of dt");
  }
  const double control_dt = ratio * sc.dt;
  const WaypointReference reference = sc.reference();
  const long steps = std::lround(sc.total_duration() / sc.dt);
  const double descent_start = sc.land ? reference.legs().back().start : 0.0;

  const TrimPoint& trim = inner.trim;
  const double bias = trim.thrust / (heli.mass * heli.gravity);
  OuterLoop outer(ctrl, bias);
  NoiseSource noise(sc.noise, sc.seed);
  Estimator estimator(sc.estimator);

  VehicleState state = trim.state;
  state.position = sc.start_position;
  state.euler.z() = sc.start_heading;

  FlightLog log;
  log.scenario = sc.name;
  log.seed = sc.seed;
  log.data.reserve(static_cast<std::size_t>(steps + 1) * kColumnCount);

  OuterLoop::Output out;
  out.command.r_out << 0.0, 0.0, sc.start_heading, -bias;
  out.u_m << 0.0, 0.0, -bias;
  bool grounded = false;
  bool violated = false;
  ControlInputs u = trim.inputs;

  for (long k = 0; k <= steps; ++k) {
    const double t = k * sc.dt;
    const Vec3 wind_ned = wind_at(sc.wind, t);
    const Sensors m = noise.measure(state);
    const Reference ref = reference.at(t);

    if (!grounded && k % ratio == 0) {
      estimator.update(m.position, m.velocity, control_dt);
      try {
        out = outer.update({estimator.position(), estimator.velocity(), m.euler.z()}, ref, t,
                           control_dt);
      } catch (const EnvelopeViolation& e) {
        violated = true;
        log.status = FlightStatus::kEnvelopeViolation;
        log.message = e.what();
        log.violation_axis = e.axis();
        out.errors = NormalizedErrors{};
        out.errors.margin[e.axis()] = e.margin();
      }
    }
    if (!grounded && !violated) {
      // Attitude-model deviation about the trim; heading measured relative to
      // the commanded heading so no wrap appears in the loop.
      const double psi_cmd = out.command.r_out[2];
      Eigen::Matrix<double, 9, 1> dev;
      dev << m.euler.x() - trim.state.euler.x(), m.euler.y() - trim.state.euler.y(),
          m.rates.x() - trim.state.rates.x(), m.rates.y() - trim.state.rates.y(),
          state.flap_lon - trim.state.flap_lon, state.flap_lat - trim.state.flap_lat,
          m.rates.z() - trim.state.rates.z(), state.gyro_integral - trim.state.gyro_integral,
          psi_cmd - trim.state.euler.z() + wrap_angle(m.euler.z() - psi_cmd);
      Eigen::Vector4d r_dev = out.command.r_out;
      r_dev[2] = psi_cmd - trim.state.euler.z();
      r_dev[3] += bias;
      u = attitude_control(dev, r_dev, inner.gains, heli.input_min, heli.input_max);
    }

    ForceBreakdown fb;
    const WindVector wind_body = rotation_matrix(state.euler) * wind_ned;
    state_derivative(state, u, wind_body, heli, &fb);

    double* row = log.append_row();
    row[kT] = t;
    const auto x = state.to_vector();
    for (int i = 0; i < VehicleState::kSize; ++i) row[kPosX + i] = x[i];
    for (int i = 0; i < 3; ++i) {
      row[kMeasX + i] = m.position[i];
      row[kMeasVn + i] = m.velocity[i];
      row[kMeasPhi + i] = m.euler[i];
      row[kRefX + i] = ref.position[i];
      row[kRefVn + i] = ref.velocity[i];
      row[kUmX + i] = out.u_m[i];
      row[kEpsPX + i] = out.errors.position_error[i];
      row[kEpsVX + i] = out.errors.velocity_error[i];
      row[kEX + i] = out.errors.e[i];
      row[kTauX + i] = out.errors.tau[i];
      row[kMarginX + i] = out.errors.margin[i];
      row[kWindN + i] = wind_ned[i];
    }
    row[kRefPsi] = ref.heading;
    for (int i = 0; i < 4; ++i) row[kPhiOut + i] = out.command.r_out[i];
    const Eigen::Vector4d uv = u.to_vector();
    for (int i = 0; i < 4; ++i) row[kLat + i] = uv[i];
    row[kThrust] = fb.rotor.thrust;
    row[kInducedVelocity] = fb.rotor.induced_velocity;
    row[kInputSaturated] =
        (uv.array() <= heli.input_min).any() || (uv.array() >= heli.input_max).any();
    row[kAttitudeClamped] = out.command.clamped;
    row[kCommandHeld] = out.command.held;
    row[kEnvelopeViolated] = violated;
    row[kGrounded] = grounded;
    row[kSteadyStateOk] = out.steady_state_ok[0] && out.steady_state_ok[1] && out.steady_state_ok[2];

    if (violated || k == steps) break;
    if (grounded) continue;

    try {
      state = step(state, u, wind_body, sc.dt, heli);
    } catch (const SingularityError& e) {
      log.status = FlightStatus::kGimbalLock;
      log.message = e.what();
      break;
    } catch (const IntegrationError& e) {
      log.status = FlightStatus::kIntegrationFailure;
      log.message = e.what();
      break;
    }
    const double t_next = t + sc.dt;
    if (sc.land && t_next >= descent_start && state.altitude() <= sc.platform_height) {
      // No contact model: the vehicle is frozen where it touched down.
      grounded = true;
      log.touchdown_time = t_next;
      state.velocity.setZero();
      state.rates.setZero();
    }
  }
  return log;
}

std::vector<FlightLog> run_batch(const std::vector<Scenario>& scenarios,
                                 const HelicopterParams& heli, const ControllerParams& ctrl,
                                 const InnerController& inner) {
  std::vector<std::future<FlightLog>> jobs;
  jobs.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    jobs.push_back(std::async(std::launch::async,
                              [&heli, &ctrl, &inner, s] { return run_scenario(s, heli, ctrl, inner); }));
  }
  std::vector<FlightLog> logs;
  logs.reserve(jobs.size());
  for (auto& j : jobs) logs.push_back(j.get());
  return logs;
}

FlightMetrics flight_metrics(const Scenario& sc, const FlightLog& log) {
  FlightMetrics fm;
  fm.completed = log.status == FlightStatus::kCompleted;
  const WaypointReference reference = sc.reference();
  const auto& legs = reference.legs();
  int hover = sc.hover_leg;
  if (hover < 0 || hover >= static_cast<int>(legs.size())) {
    hover = 0;
    for (int i = 1; i < static_cast<int>(legs.size()); ++i) {
      if (legs[i].end - legs[i].arrive > legs[hover].end - legs[hover].arrive) hover = i;
    }
  }
  fm.min_margin = std::numeric_limits<double>::infinity();
  if (legs.empty() || log.rows() == 0) return fm;
  const Leg& leg = legs[hover];
  fm.hover_start = leg.arrive;
  fm.hover_end = leg.end;

  double sum_sq = 0.0;
  long count = 0;
  double extreme = 0.0;  // furthest heading excursion past the target, signed along the step
  const double step_size = leg.heading_to - leg.heading_from;
  const double dir = step_size < 0.0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < log.rows(); ++i) {
    const double t = log.at(i, kT);
    if (!log.at(i, kGrounded)) {
      for (int a = 0; a < 3; ++a) fm.min_margin = std::min(fm.min_margin, log.at(i, kMarginX + a));
    }
    if (t < leg.start || t > leg.end) continue;
    const double psi_err = wrap_angle(log.at(i, kPsi) - leg.heading_to);
    extreme = std::max(extreme, dir * psi_err);
    if (t >= leg.arrive) {
      const Vec3 e(log.at(i, kPosX) - log.at(i, kRefX), log.at(i, kPosY) - log.at(i, kRefY),
                   log.at(i, kPosZ) - log.at(i, kRefZ));
      sum_sq += e.squaredNorm();
      ++count;
      if (t >= leg.arrive + sc.settle_time) {
        fm.heading_error_max = std::max(fm.heading_error_max, std::abs(psi_err));
      }
    }
  }
  fm.hover_rms = count ? std::sqrt(sum_sq / count) : 0.0;
  fm.yaw_overshoot = std::abs(step_size) > 1e-9 ? extreme / std::abs(step_size) : 0.0;
  return fm;
}

}  // namespace heli
