#include "heli/params.hpp"

#include "heli/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace heli {

namespace {

struct Config {
  HelicopterParams heli;
  ControllerParams ctrl;
};

struct KeySpec {
  const char* key;
  const char* unit;
  bool measured;
  std::function<double&(Config&)> ref;
};

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    auto h = [&k](const char* key, const char* unit, bool measured, double HelicopterParams::*field) {
      k.push_back({key, unit, measured, [field](Config& c) -> double& { return c.heli.*field; }});
    };
    h("m", "kg", true, &HelicopterParams::mass);
    h("J_x", "kg m^2", true, &HelicopterParams::inertia_x);
    h("J_y", "kg m^2", true, &HelicopterParams::inertia_y);
    h("J_z", "kg m^2", true, &HelicopterParams::inertia_z);
    h("g", "m/s^2", true, &HelicopterParams::gravity);
    h("R", "m", true, &HelicopterParams::rotor_radius);
    h("omega_mr", "rad/s", true, &HelicopterParams::rotor_speed);
    h("gamma_mr", "-", true, &HelicopterParams::lock_number);
    h("I_beta", "kg m^2", true, &HelicopterParams::blade_flap_inertia);
    h("b_mr", "-", true, &HelicopterParams::blade_count);
    h("c_mr", "m", true, &HelicopterParams::blade_chord);
    h("C_mr", "1/rad", false, &HelicopterParams::lift_curve_slope);
    h("rho", "kg/m^3", false, &HelicopterParams::air_density);
    h("k_lat", "-", true, &HelicopterParams::k_lat);
    h("k_lon", "-", true, &HelicopterParams::k_lon);
    h("k_col", "-", true, &HelicopterParams::k_col);
    h("k_beta", "N m/rad", false, &HelicopterParams::rotor_spring);
    h("e_mr", "m", false, &HelicopterParams::hinge_offset);
    h("l_hg", "m", false, &HelicopterParams::hub_height);
    h("v_im0", "m/s", false, &HelicopterParams::induced_velocity_init);
    h("profile_torque_divisor", "-", false, &HelicopterParams::profile_torque_divisor);
    h("profile_speed_factor", "-", false, &HelicopterParams::profile_speed_factor);
    h("l_htr", "m", false, &HelicopterParams::tail_roll_arm);
    h("l_dtr", "m", false, &HelicopterParams::tail_yaw_arm);
    h("k_tr", "N", false, &HelicopterParams::tail_thrust_gain);
    h("k_p", "-", false, &HelicopterParams::gyro_kp);
    h("k_i", "1/s", false, &HelicopterParams::gyro_ki);
    h("K_a", "rad/s", false, &HelicopterParams::gyro_amp);
    h("S_fus_x", "m^2", false, &HelicopterParams::drag_area_x);
    h("S_fus_y", "m^2", false, &HelicopterParams::drag_area_y);
    h("S_fus_z", "m^2", false, &HelicopterParams::drag_area_z);
    h("input_min", "-", false, &HelicopterParams::input_min);
    h("input_max", "-", false, &HelicopterParams::input_max);
    h("min_cos_pitch", "-", false, &HelicopterParams::min_cos_pitch);
    h("max_step", "s", false, &HelicopterParams::max_step);

    static const std::array<std::string, 3> names[] = {
        {"m_x", "m_y", "m_z"},         {"c_x", "c_y", "c_z"},
        {"tau0_x", "tau0_y", "tau0_z"}, {"tauinf_x", "tauinf_y", "tauinf_z"},
        {"k_x", "k_y", "k_z"},         {"p_x", "p_y", "p_z"}};
    double AxisGains::*fields[] = {&AxisGains::position_gain, &AxisGains::decay_rate,
                                   &AxisGains::tau_start,     &AxisGains::tau_final,
                                   &AxisGains::k,             &AxisGains::p};
    const char* units[] = {"1/s", "1/s", "m/s", "m/s", "-", "1/s"};
    const bool measured[] = {true, true, false, false, true, true};
    for (int f = 0; f < 6; ++f) {
      for (int a = 0; a < 3; ++a) {
        auto field = fields[f];
        k.push_back({names[f][a].c_str(), units[f], measured[f],
                     [field, a](Config& c) -> double& { return c.ctrl.axes[a].*field; }});
      }
    }

    auto c = [&k](const char* key, const char* unit, double ControllerParams::*field) {
      k.push_back({key, unit, false, [field](Config& cfg) -> double& { return cfg.ctrl.*field; }});
    };
    c("tau0_floor", "m/s", &ControllerParams::tau_start_floor);
    c("envelope_guard", "-", &ControllerParams::envelope_guard);
    c("integral_limit", "s", &ControllerParams::integral_limit);
    c("attitude_limit", "rad", &ControllerParams::attitude_limit);
    c("min_thrust_command", "-", &ControllerParams::min_thrust_command);
    c("gamma_override", "-", &ControllerParams::gamma_override);
    c("gamma_floor", "-", &ControllerParams::gamma_floor);
    c("gamma_max", "-", &ControllerParams::gamma_max);
    c("gamma_tolerance", "-", &ControllerParams::gamma_tolerance);
    c("gamma_margin", "-", &ControllerParams::gamma_margin);
    c("control_rate", "Hz", &ControllerParams::control_rate);

    static const char* state_keys[] = {"w_phi", "w_theta", "w_p", "w_q", "w_as",
                                       "w_bs",  "w_r",     "w_gyro", "w_psi"};
    for (int i = 0; i < 9; ++i) {
      k.push_back({state_keys[i], "-", false,
                   [i](Config& cfg) -> double& { return cfg.ctrl.state_weights[i]; }});
    }
    static const char* input_keys[] = {"w_lat", "w_lon", "w_ped", "w_col"};
    for (int i = 0; i < 4; ++i) {
      k.push_back({input_keys[i], "-", false,
                   [i](Config& cfg) -> double& { return cfg.ctrl.input_weights[i]; }});
    }
    return k;
  }();
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(where + ": cannot parse number '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError(where + ": expected true/false, got '" + text + "'");
}

void require(bool ok, const std::string& invariant) {
  if (!ok) throw ValidationError("invariant violated: " + invariant);
}

}  // namespace

double HelicopterParams::disk_area() const { return M_PI * rotor_radius * rotor_radius; }

Eigen::MatrixXd ControllerParams::weight_C() const {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(13, 9);
  for (int i = 0; i < 9; ++i) C(i, i) = state_weights[i];
  return C;
}

Eigen::MatrixXd ControllerParams::weight_D() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(13, 4);
  for (int i = 0; i < 4; ++i) D(9 + i, i) = input_weights[i];
  return D;
}

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

const ProvenanceEntry* LoadedConfig::find(const std::string& key) const {
  for (const auto& e : provenance) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

void validate(const HelicopterParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  require(p.mass > 0 && finite(p.mass), "m > 0");
  require(p.inertia_x > 0 && p.inertia_y > 0 && p.inertia_z > 0, "J_x, J_y, J_z > 0");
  require(finite(p.gravity) && p.gravity >= 0, "g >= 0");
  require(p.rotor_radius > 0 && finite(p.rotor_radius), "R > 0");
  require(p.rotor_speed > 0 && finite(p.rotor_speed), "omega_mr > 0");
  require(p.air_density > 0 && finite(p.air_density), "rho > 0");
  require(p.blade_flap_inertia > 0, "I_beta > 0");
  require(p.lock_number > 0, "gamma_mr > 0");
  require(p.blade_count > 0 && p.blade_chord > 0, "b_mr > 0 and c_mr > 0");
  {
    const double limit = 3.0 * p.rotor_radius / 8.0;
    std::ostringstream msg;
    msg << "0 <= e_mr < 3R/8 (e_mr = " << p.hinge_offset << ", 3R/8 = " << limit << ")";
    require(p.hinge_offset >= 0 && p.hinge_offset < limit, msg.str());
  }
  require(p.drag_area_x >= 0 && p.drag_area_y >= 0 && p.drag_area_z >= 0,
          "S_fus_x, S_fus_y, S_fus_z >= 0");
  require(p.profile_torque_divisor > 0, "profile_torque_divisor > 0");
  require(p.input_min < p.input_max, "input_min < input_max");
  require(p.min_cos_pitch > 0 && p.min_cos_pitch < 1, "0 < min_cos_pitch < 1");
  require(p.max_step > 0, "max_step > 0");
  require(p.induced_velocity_init >= 0, "v_im0 >= 0");
}

void validate(const ControllerParams& c) {
  static const char* axis[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    const auto& a = c.axes[i];
    const std::string n = axis[i];
    require(a.position_gain > a.decay_rate, "m_" + n + " > c_" + n);
    require(a.decay_rate > 0, "c_" + n + " > 0");
    require(a.tau_final > 0, "tauinf_" + n + " > 0");
    require(a.tau_start > a.tau_final, "tau0_" + n + " > tauinf_" + n + " > 0");
    require(a.k > 0 && a.p >= 0, "k_" + n + " > 0 and p_" + n + " >= 0");
  }
  require(c.tau_start_floor > 0, "tau0_floor > 0");
  require(c.envelope_guard > 0 && c.envelope_guard < 1, "0 < envelope_guard < 1");
  require(c.integral_limit > 0, "integral_limit > 0");
  require(c.attitude_limit > 0 && c.attitude_limit < M_PI / 2, "0 < attitude_limit < pi/2");
  require(c.control_rate > 0, "control_rate > 0");
  require(c.gamma_floor > 0 && c.gamma_max > c.gamma_floor, "0 < gamma_floor < gamma_max");
  require(c.gamma_tolerance > 0 && c.gamma_margin >= 1, "gamma_tolerance > 0, gamma_margin >= 1");
  require(c.gamma_override >= 0, "gamma_override >= 0");
  for (double w : c.input_weights) require(w != 0.0, "D^T D nonsingular (all input weights nonzero)");
  for (double w : c.state_weights) require(std::isfinite(w), "state weights finite");
}

RotorConstants derived_constants(const HelicopterParams& p) {
  validate(p);
  const double R = p.rotor_radius;
  const double tau = 48.0 * R / (p.lock_number * p.rotor_speed * (3.0 * R - 8.0 * p.hinge_offset));
  const double a_bs = 8.0 * p.rotor_spring /
                      (p.lock_number * p.rotor_speed * p.rotor_speed * p.blade_flap_inertia);
  return {tau, a_bs};
}

LoadedConfig parse_params(std::istream& in, const std::string& origin) {
  Config cfg;
  std::map<std::string, bool> seen;
  bool auto_tau_seen = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(where + ": empty key or value");
    if (key == "auto_tau0") {
      cfg.ctrl.auto_tau_start = parse_bool(value, where);
      auto_tau_seen = true;
      continue;
    }
    bool matched = false;
    for (const auto& spec : registry()) {
      if (key == spec.key) {
        if (seen[key]) throw ParseError(where + ": duplicate key '" + key + "'");
        spec.ref(cfg) = parse_double(value, where);
        seen[key] = true;
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(where + ": unknown key '" + key + "'");
  }

  validate(cfg.heli);
  validate(cfg.ctrl);

  LoadedConfig out{cfg.heli, cfg.ctrl, {}};
  for (const auto& spec : registry()) {
    out.provenance.push_back({spec.key, format_exact(spec.ref(cfg)), seen.count(spec.key) > 0,
                              spec.measured});
  }
  out.provenance.push_back(
      {"auto_tau0", cfg.ctrl.auto_tau_start ? "true" : "false", auto_tau_seen, false});
  return out;
}

LoadedConfig load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return parse_params(in, path);
}

void write_params(std::ostream& out, const HelicopterParams& heli, const ControllerParams& ctrl) {
  Config cfg{heli, ctrl};
  out << "# helicopter + controller configuration (SI units)\n";
  for (const auto& spec : registry()) {
    out << spec.key << " = " << format_exact(spec.ref(cfg)) << "  # [" << spec.unit << "]\n";
  }
  out << "auto_tau0 = " << (ctrl.auto_tau_start ? "true" : "false") << "\n";
}

void write_provenance(std::ostream& out, const LoadedConfig& cfg) {
  out << "# key value origin basis\n";
  for (const auto& e : cfg.provenance) {
    out << e.key << ' ' << e.value << ' ' << (e.from_file ? "file" : "defaulted") << ' '
        << (e.measured ? "measured" : "assumed") << '\n';
  }
}

}  // namespace heli
