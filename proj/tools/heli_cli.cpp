// heli: trim, linearize, synthesize and fly the helicopter model.
//
// Exit codes: 0 success, 1 property failure, 2 usage / parse / missing file,
// 3 numerical failure, 4 flight ended early.

#include "heli/check.hpp"
#include "heli/error.hpp"
#include "heli/matrix_io.hpp"
#include "heli/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using namespace heli;

constexpr int kExitProperty = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFlight = 4;
constexpr double kDeg = 180.0 / std::numbers::pi;

std::string default_config_path() {
  if (const char* dir = std::getenv("HELI_CONFIG_DIR"); dir && *dir) {
    return (std::filesystem::path(dir) / "heli.conf").string();
  }
  return (std::filesystem::path(HELI_DEFAULT_CONFIG_DIR) / "heli.conf").string();
}

// An explicit --config must exist; the default location may be absent, in
// which case built-in defaults apply.
LoadedConfig load_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_params(explicit_path);
  const std::string path = default_config_path();
  if (std::filesystem::exists(path)) return load_params(path);
  std::istringstream empty;
  return parse_params(empty, "<defaults>");
}

void print_trim(std::ostream& out, const TrimPoint& t) {
  const auto& s = t.state;
  out << std::setprecision(10);
  out << "trim residual       " << t.residual << " (" << t.iterations << " iterations)\n"
      << "phi, theta [rad]    " << s.euler.x() << ' ' << s.euler.y() << '\n'
      << "a_s, b_s [rad]      " << s.flap_lon << ' ' << s.flap_lat << '\n'
      << "gyro integral       " << s.gyro_integral << '\n'
      << "delta lat lon ped col " << t.inputs.lat << ' ' << t.inputs.lon << ' ' << t.inputs.ped
      << ' ' << t.inputs.col << '\n'
      << "thrust [N]          " << t.thrust << '\n'
      << "induced vel. [m/s]  " << t.induced_velocity << '\n';
}

void print_synthesis(std::ostream& out, const Synthesis& s, const HinfCertificate& cert) {
  out << std::setprecision(8);
  out << "gamma               " << s.gamma.gamma << " (infimum " << s.gamma.infimum << ", "
      << s.gamma.bisection_steps << " bisection steps" << (s.gamma.at_floor ? ", at floor" : "")
      << ")\n";
  if (s.gamma.lyapunov_estimate) {
    out << "closed-form estimate " << *s.gamma.lyapunov_estimate << '\n';
  } else {
    out << "closed-form estimate n/a (" << s.gamma.lyapunov_note << ")\n";
  }
  out << "riccati residual    " << s.riccati_residual << '\n'
      << "hinf norm (sweep)   " << cert.norm << " at " << cert.peak_frequency << " rad/s -> "
      << (cert.holds ? "certificate holds" : "CERTIFICATE FAILS") << '\n'
      << "closed-loop poles  ";
  for (const auto& l : s.gains.closed_loop_spectrum) out << ' ' << l;
  out << '\n';
}

InnerController controller_from_file(const std::string& path, const HelicopterParams& heli) {
  const MatrixBundle b = load_matrices(path);
  InnerController inner;
  inner.gains = gains_from_bundle(b);
  const auto& x = b.get("x_trim");
  if (x.size() != VehicleState::kSize) throw ParseError(path + ": bad x_trim");
  inner.trim.state = VehicleState::from_vector(Eigen::Map<const VehicleState::Vector>(x.data()));
  inner.trim.inputs = ControlInputs::from_vector(inner.gains.u_trim);
  inner.trim.thrust = b.get("trim_scalars")(0, 0);
  inner.trim.residual =
      state_derivative(inner.trim.state, inner.trim.inputs, Vec3::Zero(), heli).to_vector().norm();
  return inner;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ParseError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

int report_flight(const Scenario& sc, const FlightLog& log, const std::string& out_path) {
  const FlightMetrics fm = flight_metrics(sc, log);
  std::cout << std::setprecision(6) << sc.name << " seed " << sc.seed << ": "
            << status_name(log.status) << ", " << log.rows() << " rows -> " << out_path << '\n'
            << "  hover RMS " << fm.hover_rms << " m over [" << fm.hover_start << ", "
            << fm.hover_end << "] s, heading error " << fm.heading_error_max * kDeg
            << " deg, yaw overshoot " << 100.0 * fm.yaw_overshoot << " %, min margin "
            << fm.min_margin << " m/s";
  if (log.touchdown_time >= 0.0) std::cout << ", touchdown " << log.touchdown_time << " s";
  std::cout << '\n';
  if (log.status != FlightStatus::kCompleted) {
    std::cerr << "flight ended early: " << log.message << '\n';
    return kExitFlight;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-helicopter simulator with an H-infinity attitude loop and a "
               "prescribed-performance position loop"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "parameter file (default: $HELI_CONFIG_DIR/heli.conf, then the shipped config)");

  auto* trim_cmd = app.add_subcommand("trim", "solve the hover trim and print it");
  bool provenance = false;
  trim_cmd->add_flag("--provenance", provenance, "also list every parameter and where it came from");

  auto* lin_cmd = app.add_subcommand("linearize", "linearize about the hover trim");
  std::string lin_out = "model.txt";
  lin_cmd->add_option("--out", lin_out, "matrix file to write");

  auto* synth_cmd = app.add_subcommand("synth", "synthesize the H-infinity attitude gains");
  std::string model_path, gains_out = "gains.txt";
  synth_cmd->add_option("--model", model_path, "linear model file (default: linearize now)");
  synth_cmd->add_option("--out", gains_out, "gain file to write");

  auto* fly_cmd = app.add_subcommand("fly", "run a closed-loop scenario");
  std::string scenario_name = "paper_hover", fly_out = "log.csv", plots_dir, gains_path, seeds;
  std::uint64_t seed = 42;
  double hold = -1.0, gust = -1.0;
  bool no_noise = false;
  fly_cmd->add_option("--scenario", scenario_name, "paper_hover | paper_hover_long | hold");
  fly_cmd->add_option("--seed", seed, "noise seed");
  fly_cmd->add_option("--seeds", seeds, "comma-separated seeds run concurrently; logs get a _<seed> suffix");
  fly_cmd->add_option("--out", fly_out, "flight log CSV");
  fly_cmd->add_option("--plots", plots_dir, "directory for plot-ready CSV bundles");
  fly_cmd->add_option("--gains", gains_path, "frozen gain file from 'synth' (default: synthesize now)");
  fly_cmd->add_option("--hold", hold, "hold duration [s]");
  fly_cmd->add_option("--gust", gust, "gust speed [m/s]");
  fly_cmd->add_flag("--no-noise", no_noise, "noise-free sensors");

  auto* check_cmd = app.add_subcommand("check", "run the property suite");
  std::string report_path = "check_report.txt";
  std::vector<int> only;
  check_cmd->add_option("--report", report_path, "report file");
  check_cmd->add_option("--only", only, "run only these check numbers")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const LoadedConfig cfg = load_config(config_path);
    const HelicopterParams& heli = cfg.heli;
    const ControllerParams& ctrl = cfg.ctrl;

    if (*trim_cmd) {
      print_trim(std::cout, find_trim(heli));
      if (provenance) write_provenance(std::cout, cfg);
      return 0;
    }
    if (*lin_cmd) {
      const LinearModel m = jacobians(find_trim(heli), heli, ctrl);
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
      save_matrices(lin_out, model_bundle(m));
      std::cout << "wrote " << lin_out << '\n';
      return 0;
    }
    if (*synth_cmd) {
      const LinearModel m = model_path.empty() ? jacobians(find_trim(heli), heli, ctrl)
                                               : model_from_bundle(load_matrices(model_path));
      const Synthesis s = synthesize(m, ctrl);
      const HinfCertificate cert = verify_hinf_norm(m, s.gains);
      print_synthesis(std::cout, s, cert);
      save_matrices(gains_out, gains_bundle(s.gains, m));
      std::cout << "wrote " << gains_out << '\n';
      return cert.holds ? 0 : kExitProperty;
    }
    if (*fly_cmd) {
      InnerController inner;
      if (!gains_path.empty()) {
        inner = controller_from_file(gains_path, heli);
      } else {
        const LinearModel m = jacobians(find_trim(heli), heli, ctrl);
        inner = {synthesize(m, ctrl).gains, m.trim};
      }
      std::vector<std::uint64_t> seed_list = seeds.empty() ? std::vector<std::uint64_t>{seed}
                                                           : parse_seeds(seeds);
      std::vector<Scenario> scenarios;
      for (auto s : seed_list) {
        auto sc = named_scenario(scenario_name, s);
        if (!sc) {
          std::cerr << "unknown scenario '" << scenario_name
                    << "' (paper_hover, paper_hover_long, hold)\n";
          return kExitUsage;
        }
        if (hold >= 0.0) {
          sc = scenario_name == "hold" ? hold_scenario(s, hold) : paper_hover_scenario(s, hold);
        }
        if (gust >= 0.0) {
          for (auto& w : sc->wind) w.speed = gust;
        }
        if (no_noise) sc->noise = NoiseSpec{0.0, 0.0, 0.0, 0.0};
        scenarios.push_back(*sc);
      }
      const std::vector<FlightLog> logs = run_batch(scenarios, heli, ctrl, inner);
      int code = 0;
      for (std::size_t i = 0; i < logs.size(); ++i) {
        std::string path = fly_out;
        if (logs.size() > 1) {
          const std::filesystem::path p(fly_out);
          path = (p.parent_path() / (p.stem().string() + "_" + std::to_string(scenarios[i].seed) +
                                     p.extension().string()))
                     .string();
        }
        save_csv(path, logs[i]);
        if (!plots_dir.empty()) {
          for (const auto& f : write_plot_bundles(plots_dir, logs[i],
                                                  scenarios[i].name + "_" +
                                                      std::to_string(scenarios[i].seed))) {
            std::cout << "wrote " << f << '\n';
          }
        }
        code = std::max(code, report_flight(scenarios[i], logs[i], path));
      }
      return code;
    }
    if (*check_cmd) {
      SuiteOptions opt;
      opt.only = only;
      const auto results = run_property_suite(heli, ctrl, opt);
      std::ofstream report(report_path);
      bool all = true;
      for (const auto& r : results) {
        std::ostringstream line;
        line << (r.passed() ? "PASS" : "FAIL") << "  " << r.id << ". " << r.name << " ["
             << std::setprecision(3) << r.seconds << " s / " << r.time_limit << " s] " << r.detail;
        std::cout << line.str() << '\n';
        report << line.str() << '\n';
        all = all && r.passed();
      }
      if (!all) {
        std::cerr << "property failures; report: " << report_path << '\n';
        return kExitProperty;
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
