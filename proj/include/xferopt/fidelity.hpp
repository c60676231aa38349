#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "xferopt/bath.hpp"
#include "xferopt/pulse.hpp"

namespace xferopt {

/// Second-order average transfer infidelity split into its sources.
struct InfidelityBreakdown {
  double bath_infidelity = 0.0;
  double leakage_penalty = 0.0;

  double total() const { return bath_infidelity + leakage_penalty; }
};

// Weights of the two modulation channels. The first channel carries cos^2(phi) (population left in
// the noisy qubit), the second sin(2 phi) (coherence between the two qubits).
inline constexpr double kPopulationWeight = 2.0 / 3.0;
inline constexpr double kCoherenceWeight = 0.5;

/// Finite-time transform of a piecewise-linear signal sampled on a uniform grid:
/// X(omega) = \int_0^{t_f} x(tau) e^{-i omega tau} dtau, integrated exactly for the interpolant.
std::complex<double> windowed_transform(std::span<const double> samples, double t_f, double omega);

/// F(t_f, omega) = 2/3 |FT[cos^2 phi]|^2 + 1/2 |FT[sin 2phi]|^2.
///
/// The population channel transforms cos^2(phi) itself, so its Markovian limit is the cos^4
/// integrand and the ramp gives gamma pi^2 / (8E).
double modulation_spectrum(const Pulse& p, double omega);

struct FrequencyQuadrature {
  /// Upper cutoff; 0 picks max(40 / t_c, 40 N / t_f).
  double omega_max = 0.0;
  /// Gauss-Legendre panels per oscillation half-period pi / t_f.
  int panels_per_half_period = 1;
  /// Relative size above which the truncation remainder is treated as an error.
  double tail_tolerance = 1e-8;
};

/// Diagnostic result of the frequency-domain overlap integral.
struct FrequencyOverlap {
  double value = 0.0;      ///< \int G F domega, tail included
  double tail = 0.0;       ///< analytic |omega| > omega_max contribution added to `value`
  double remainder = 0.0;  ///< change of the corrected integral when the cutoff is halved
  double omega_max = 0.0;
};

FrequencyOverlap frequency_overlap(const Pulse& p, const BathModel& b, const FrequencyQuadrature& q = {});

/// \int G(omega) F(t_f, omega) domega. Throws std::runtime_error when the cutoff is too small.
double infidelity_freq(const Pulse& p, const BathModel& b, const FrequencyQuadrature& q = {});

/// Time-domain double integral \iint Phi(tau - tau') [2/3 x1 x1' + 1/2 x2 x2'], evaluated as a
/// quadratic form whose matrix is the exact kernel integral against hat functions. Requires t_c > 0.
double infidelity_time(const Pulse& p, const BathModel& b);

/// gamma \int [2/3 cos^4 phi + 1/2 sin^2 2phi] dtau (trapezoid on the pulse grid).
double infidelity_markovian(const Pulse& p, double gamma);
/// Markovian limit of `b` (uses the white-noise intensity 2 C gamma; ignores t_c).
double infidelity_markovian(const Pulse& p, const BathModel& b);

/// Production path: time domain for t_c > 0, Markovian closed form for t_c = 0.
double bath_infidelity(const Pulse& p, const BathModel& b);

/// d(bath_infidelity)/d(phi_k) for the interior samples k = 1..N-1.
std::vector<double> infidelity_gradient(const Pulse& p, const BathModel& b);

/// Gram matrix K_jk = \iint Phi(tau - tau') h_j(tau) h_k(tau') of the exponential correlation
/// against the hat functions of a uniform grid, so that \iint Phi x x' = x^T K x exactly for any
/// piecewise-linear x.
class DephasingKernel {
 public:
  DephasingKernel(const BathModel& b, std::size_t segments, double t_f);

  std::size_t size() const { return n_; }
  double operator()(std::size_t j, std::size_t k) const { return k_[j * n_ + k]; }
  void apply(std::span<const double> x, std::span<double> out) const;
  double quadratic_form(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::vector<double> k_;
};

/// Bath infidelity and its gradient on a fixed (bath, grid) pair. The kernel is built once and
/// shared read-only by every evaluation, so one instance serves concurrent callers.
class InfidelityModel {
 public:
  InfidelityModel(const BathModel& b, std::size_t segments, double t_f);

  std::size_t segments() const { return segments_; }
  double t_f() const { return t_f_; }
  const BathModel& bath() const { return bath_; }

  double value(std::span<const double> phases) const;
  /// Fills `grad` (size N+1) with the derivative w.r.t. every sample, endpoints included.
  double value_and_gradient(std::span<const double> phases, std::span<double> grad) const;

 private:
  BathModel bath_;
  std::size_t segments_;
  double t_f_;
  std::vector<double> markov_weights_;  // trapezoid weights times white-noise intensity
  std::optional<DephasingKernel> kernel_;  // empty in the Markovian case
};

namespace detail {
// (z - 1 + e^{-z}) / z^2 and (1 - e^{-z}(1 + z)) / z^2: moments of the two hat halves against e^{-z s}.
double hat_moment0(double z);
double hat_moment1(double z);
std::complex<double> hat_moment0(std::complex<double> z);
std::complex<double> hat_moment1(std::complex<double> z);
}  // namespace detail

}  // namespace xferopt
