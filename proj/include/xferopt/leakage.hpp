#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "xferopt/pulse.hpp"

namespace xferopt {

using Complex = std::complex<double>;

/// State of the even-parity pair {|g1 g2>, |e1 e2>} in the lab frame.
struct EvenState {
  Complex amp_gg{1.0, 0.0};
  Complex amp_ee{0.0, 0.0};

  double leakage() const { return std::norm(amp_ee); }
  double norm() const { return std::norm(amp_gg) + std::norm(amp_ee); }
};

/// Closed-form propagator exp(-i (w0 sz + v sx) dt) of one constant-drive segment, with
/// sz = |ee><ee| - |gg><gg| and sx = |gg><ee| + |ee><gg|. Rows/columns are ordered (gg, ee).
struct SegmentPropagator {
  Complex m00, m01, m10, m11;

  SegmentPropagator(double omega0, double v, double dt);
  EvenState apply(const EvenState& s) const {
    return {m00 * s.amp_gg + m01 * s.amp_ee, m10 * s.amp_gg + m11 * s.amp_ee};
  }
};

/// Exact piecewise propagation under H_E = w0 sz + V(t) sx (level splitting 2 w0).
EvenState propagate_even(const Pulse& p, double omega0, const EvenState& initial = {});

/// State after every segment, index 0 being `initial`.
std::vector<EvenState> even_trajectory(const Pulse& p, double omega0, const EvenState& initial = {});

/// First-order amplitude -i \int V(tau) e^{2 i w0 tau} dtau in the interaction picture of the
/// 2 w0 splitting. Its magnitude is frame independent.
Complex perturbative_leakage_amplitude(const Pulse& p, double omega0);

/// |amp_ee|^2 after propagating `phases` (uniform grid over t_f, starting in |gg>) and its
/// derivative w.r.t. every phase sample, by forward/backward sweeps over the segment propagators.
double leakage_and_gradient(std::span<const double> phases, double t_f, double omega0, std::span<double> grad);

/// kappa |psi_ee|^2 / T; only the 1/T scaling is structural, kappa is calibrated numerically.
inline constexpr double kDefaultCorrectorKappa = 2.0;
double corrector_energy_estimate(double psi_ee, double available_time, double kappa = kDefaultCorrectorKappa);

/// Weakest drive V(t) = a sin(2 w0 t) + b cos(2 w0 t) over [0, T] that returns `leaked` to |gg>.
struct Corrector {
  double sin_amplitude = 0.0;
  double cos_amplitude = 0.0;
  double energy = 0.0;            // \int V^2 dt of the discretized drive
  double residual_leakage = 0.0;  // |amp_ee(T)|^2 after the correction
  Pulse drive;
};

/// Starts from the resonant rotating-wave estimate and refines (a, b) by Newton iteration on the
/// exact propagator so that amp_ee(T) = 0.
Corrector minimal_corrector(const EvenState& leaked, double omega0, double available_time,
                            std::size_t segments);

struct CorrectorScaling {
  std::vector<double> times;
  std::vector<double> energies;
  double slope = 0.0;         // d log E / d log T
  double kappa = 0.0;         // least-squares fit of E = kappa |psi_ee|^2 / T
  double max_residual = 0.0;  // max relative deviation of the data from the fit
};

/// Minimal corrector energies for each available time and the fitted 1/T law.
CorrectorScaling corrector_scaling(const EvenState& leaked, double omega0, std::span<const double> times,
                                   double segments_per_unit_time);

}  // namespace xferopt
