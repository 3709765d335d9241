// Runs the acceptance property suite on the shipped configuration and prints
// one line per criterion. Exit status is the number of failures (capped).
#include "heli/check.hpp"
#include "heli/error.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

int main() {
  heli::LoadedConfig cfg;
  try {
    cfg = heli::load_params(std::string(HELI_DEFAULT_CONFIG_DIR) + "/heli.conf");
  } catch (const heli::Error& e) {
    std::fprintf(stderr, "cannot load shipped configuration: %s\n", e.what());
    return 2;
  }

  const auto results = heli::run_property_suite(cfg.heli, cfg.ctrl);
  int failed = 0;
  for (const auto& r : results) {
    const bool ok = r.passed();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %d  %-22s %7.3f s (limit %g s)  %s\n", ok ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.time_limit, r.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return std::min(failed, 1);
}
