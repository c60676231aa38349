#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace xferopt {

/// Normalization applied to the Lorentzian correlation gamma/t_c exp(-|t|/t_c). With 1/2 the
/// Markovian limit of the overlap integral gives the ramp infidelity gamma pi^2 / (8E); set it to 1
/// for the unnormalized kernel.
inline constexpr double kDefaultCorrNorm = 0.5;

/// Classical dephasing noise acting on the source qubit as b(t) sigma_z.
///
/// Correlation <b(t) b(0)> = corr_norm * gamma / t_c * exp(-|t| / t_c); t_c = 0 is the
/// Markovian (white-noise) limit with intensity 2 * corr_norm * gamma.
struct BathModel {
  double gamma = 0.0;
  double t_c = 0.0;
  double corr_norm = kDefaultCorrNorm;

  bool markovian() const { return t_c == 0.0; }
  /// Integral of the correlation over the real line, 2 * corr_norm * gamma.
  double white_noise_intensity() const { return 2.0 * corr_norm * gamma; }
  /// Throws std::invalid_argument on negative or non-finite parameters.
  void validate() const;
};

/// Phi(dt). Requires t_c > 0; the Markovian limit has no pointwise correlation.
double correlation(const BathModel& b, double dt);

/// G(omega) = (1/2pi) \int Phi(t) e^{i omega t} dt = (C gamma / pi) / (1 + omega^2 t_c^2).
double spectrum(const BathModel& b, double omega);

/// Stationary Ornstein-Uhlenbeck samples b_0..b_{steps-1} on a grid of spacing dt.
///
/// Exact recursion b_{k+1} = rho b_k + sigma sqrt(1 - rho^2) xi_k with rho = exp(-dt/t_c) and
/// sigma^2 = Phi(0). The normals xi come from a counter-based generator keyed by
/// (seed, trajectory, step), so a trajectory never depends on which worker produced it.
/// Requires t_c > 0 and dt <= t_c / 10.
std::vector<double> sample_noise_trajectory(const BathModel& b, double dt, std::size_t steps,
                                            std::uint64_t seed, std::uint64_t trajectory);

/// Fills `out` in place; same contract as sample_noise_trajectory.
void sample_noise_trajectory(const BathModel& b, double dt, std::uint64_t seed,
                             std::uint64_t trajectory, std::vector<double>& out);

}  // namespace xferopt
