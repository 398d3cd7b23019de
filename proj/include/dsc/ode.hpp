#pragma once

#include <cstddef>

namespace dsc::ode {

/// One classical fourth-order Runge-Kutta step for y' = f(t, y).
template <typename F>
double rk4_step(F&& f, double t, double y, double h) {
  const double k1 = f(t, y);
  const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = f(t + h, y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Advances y from t over `span` using `substeps` equal RK4 steps.
template <typename F>
double rk4_advance(F&& f, double t, double y, double span, std::size_t substeps) {
  const double h = span / static_cast<double>(substeps);
  for (std::size_t k = 0; k < substeps; ++k) {
    y = rk4_step(f, t + static_cast<double>(k) * h, y, h);
  }
  return y;
}

}  // namespace dsc::ode
