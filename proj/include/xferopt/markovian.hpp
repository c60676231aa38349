#pragma once

#include <cstddef>
#include <vector>

#include "xferopt/pulse.hpp"

namespace xferopt {

/// Universal white-noise optimal profile phi_M(x) on dimensionless time x.
///
/// phi_M solves phi' = sqrt(sin^2(2 phi)/2 + 2 cos^4(phi)/3), phi(0) = 0, and approaches pi/2
/// exponentially. `energy` is e_M = \int_0^\infty phi_M'^2 dx.
struct MarkovianProfile {
  std::vector<double> x;
  std::vector<double> phi;
  std::vector<double> dphi;
  double energy = 0.0;

  /// phi_M(x) by cubic Hermite interpolation of the stored samples; pi/2 beyond the last sample.
  double phase_at(double x) const;
  /// Last stored abscissa, where pi/2 - phi_M < 1e-10.
  double x_end() const { return x.back(); }
};

/// Right-hand side of the profile equation, sqrt of the white-noise infidelity integrand.
double markovian_rate(double phi);

/// Adaptive Dormand-Prince integration at relative tolerance `tol` in [1e-12, 1e-4]. Once
/// pi/2 - phi < 1e-6 the remaining approach follows the linearization phi' = sqrt(2) (pi/2 - phi).
/// e_M is evaluated as \int_0^{pi/2} phi' dphi, which has a bounded integrand.
MarkovianProfile solve_markovian_profile(double tol = 1e-10);

/// Process-wide profile solved once at the default tolerance.
const MarkovianProfile& default_markovian_profile();

/// phi(t) = phi_M((E / e_M) t), truncated where pi/2 - phi < 1e-8 and pinned to pi/2 at the end.
Pulse optimal_markovian_pulse(const EnergyBudget& budget, std::size_t segments = kDefaultSegments);
Pulse optimal_markovian_pulse(const MarkovianProfile& profile, const EnergyBudget& budget,
                              std::size_t segments = kDefaultSegments);

/// gamma e_M^2 / E.
double markovian_optimum_infidelity(double gamma, double energy);
double markovian_optimum_infidelity(const MarkovianProfile& profile, double gamma, double energy);

}  // namespace xferopt
