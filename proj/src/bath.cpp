#include "xferopt/bath.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xferopt/random.hpp"

namespace xferopt {

void BathModel::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("bath gamma must be >= 0");
  if (!(t_c >= 0.0) || !std::isfinite(t_c)) throw std::invalid_argument("bath t_c must be >= 0");
  if (!(corr_norm > 0.0) || !std::isfinite(corr_norm)) {
    throw std::invalid_argument("bath corr_norm must be positive");
  }
}

double correlation(const BathModel& b, double dt) {
  if (b.markovian()) {
    throw std::invalid_argument("correlation: Markovian bath (t_c = 0) has no pointwise correlation");
  }
  return b.corr_norm * b.gamma / b.t_c * std::exp(-std::abs(dt) / b.t_c);
}

double spectrum(const BathModel& b, double omega) {
  const double flat = b.corr_norm * b.gamma / std::numbers::pi;
  if (b.markovian()) return flat;
  const double x = omega * b.t_c;
  return flat / (1.0 + x * x);
}

void sample_noise_trajectory(const BathModel& b, double dt, std::uint64_t seed,
                             std::uint64_t trajectory, std::vector<double>& out) {
  if (b.markovian()) {
    throw std::invalid_argument("sample_noise_trajectory: Markovian bath has no OU representation");
  }
  if (!(dt > 0.0) || dt > b.t_c / 10.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("sample_noise_trajectory: grid step must satisfy 0 < dt <= t_c/10");
  }
  if (out.empty()) return;
  const CounterNormal normal(seed);
  const double sigma = std::sqrt(b.corr_norm * b.gamma / b.t_c);
  const double rho = std::exp(-dt / b.t_c);
  // -expm1 keeps 1 - rho^2 accurate when dt << t_c
  const double kick = sigma * std::sqrt(-std::expm1(-2.0 * dt / b.t_c));
  out[0] = sigma * normal(trajectory, 0);
  for (std::size_t k = 1; k < out.size(); ++k) {
    out[k] = rho * out[k - 1] + kick * normal(trajectory, k);
  }
}

std::vector<double> sample_noise_trajectory(const BathModel& b, double dt, std::size_t steps,
                                            std::uint64_t seed, std::uint64_t trajectory) {
  std::vector<double> out(steps);
  sample_noise_trajectory(b, dt, seed, trajectory, out);
  return out;
}

}  // namespace xferopt
