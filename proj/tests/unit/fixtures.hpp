#pragma once

#include "heli/hinf.hpp"
#include "heli/linearize.hpp"
#include "heli/scenario.hpp"

// Trim, model and synthesized gains for the default vehicle, built once per
// test binary: synthesis is the slowest step of the pipeline.
struct Design {
  heli::HelicopterParams heli;
  heli::ControllerParams ctrl;
  heli::LinearModel model;
  heli::Synthesis synthesis;

  heli::InnerController inner() const { return {synthesis.gains, model.trim}; }
};

inline const Design& default_design() {
  static const Design d = [] {
    Design out;
    const heli::TrimPoint trim = heli::find_trim(out.heli);
    out.model = heli::jacobians(trim, out.heli, out.ctrl);
    out.synthesis = heli::synthesize(out.model, out.ctrl);
    return out;
  }();
  return d;
}
