#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "xferopt/pulse.hpp"

namespace testing {

// Smooth random profile: ramp to pi/2 plus a few sine modes, pinned at both ends.
inline xferopt::Pulse random_pulse(std::mt19937_64& rng, double t_f, std::size_t segments, int modes = 6,
                                   double amplitude = 0.6) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(modes));
  for (int m = 0; m < modes; ++m) a[static_cast<std::size_t>(m)] = amplitude * u(rng) / (m + 1);
  std::vector<double> phi(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(segments);
    double v = xferopt::kHalfPi * s;
    for (int m = 0; m < modes; ++m) v += a[static_cast<std::size_t>(m)] * std::sin((m + 1) * std::numbers::pi * s);
    phi[k] = v;
  }
  phi.front() = 0.0;
  phi.back() = xferopt::kHalfPi;
  return xferopt::Pulse(std::move(phi), t_f);
}

// Central difference of f along coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double fp = f(x);
  x[k] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

// Composite Gauss-Legendre (5 points) of f over [a, b] split into `panels`.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) sum += w[i] * f(mid + 0.5 * h * x[i]);
  }
  return 0.5 * h * sum;
}

}  // namespace testing
