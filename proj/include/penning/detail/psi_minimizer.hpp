#pragma once

#include <cmath>
#include <numbers>
#include <utility>

namespace penning {

template <class F>
std::pair<double, double> minimize_over_psi(F&& f) {
  constexpr double pi = std::numbers::pi;
  constexpr double step = pi / 180.0;
  double best_psi = 0.0;
  double best = f(0.0);
  for (int k = 1; k < 180; ++k) {
    const double value = f(k * step);
    if (value < best) {
      best = value;
      best_psi = k * step;
    }
  }
  // Golden section on the bracketing interval; periodicity lets it cross 0.
  constexpr double inv_phi = 0.6180339887498949;
  double a = best_psi - step;
  double b = best_psi + step;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-4) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double psi = 0.5 * (a + b);
  double value = f(psi);
  if (best < value) {
    psi = best_psi;
    value = best;
  }
  psi = std::fmod(psi, pi);
  if (psi < 0.0) psi += pi;
  return {psi, value};
}

}  // namespace penning
