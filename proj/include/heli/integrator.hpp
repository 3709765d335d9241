#pragma once

namespace heli {

/// Classical four-stage Runge-Kutta step for any vector-space state type.
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + (0.5 * dt) * k1));
  const State k3 = f(State(x + (0.5 * dt) * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace heli
