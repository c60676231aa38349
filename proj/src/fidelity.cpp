#include "xferopt/fidelity.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xferopt {

namespace detail {
namespace {

constexpr int kSeriesTerms = 24;

template <class T>
T moment0_series(T z) {
  // sum_k (-z)^k / (k+2)!
  T term = T(0.5);
  T sum = term;
  for (int k = 1; k < kSeriesTerms; ++k) {
    term *= -z / static_cast<double>(k + 2);
    sum += term;
  }
  return sum;
}

template <class T>
T moment1_series(T z) {
  // sum_k (-1)^k (k+1) z^k / (k+2)!
  T power = T(0.5);  // (-z)^k / (k+2)!
  T sum = power;
  for (int k = 1; k < kSeriesTerms; ++k) {
    power *= -z / static_cast<double>(k + 2);
    sum += static_cast<double>(k + 1) * power;
  }
  return sum;
}

}  // namespace

double hat_moment0(double z) {
  if (std::abs(z) < 1.0) return moment0_series(z);
  return (z - 1.0 + std::exp(-z)) / (z * z);
}

double hat_moment1(double z) {
  if (std::abs(z) < 1.0) return moment1_series(z);
  return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

std::complex<double> hat_moment0(std::complex<double> z) {
  if (std::abs(z) < 1.0) return moment0_series(z);
  return (z - 1.0 + std::exp(-z)) / (z * z);
}

std::complex<double> hat_moment1(std::complex<double> z) {
  if (std::abs(z) < 1.0) return moment1_series(z);
  return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

}  // namespace detail

namespace {

// Self-interaction of the hat halves on one segment of unit length under e^{-r|u - v|}:
// diagonal \iint (1-u)(1-v) e^{-r|u-v|} and off-diagonal \iint (1-u) v e^{-r|u-v|}.
double self_diag(double r) {
  if (r < 1.0) {
    // sum_k (-1)^k 2(k+3)/(k+4)! r^k
    double sum = 0.0;
    double fact = 24.0;  // (k+4)!
    double power = 1.0;
    for (int k = 0; k < 24; ++k) {
      if (k > 0) fact *= static_cast<double>(k + 4);
      sum += power * 2.0 * static_cast<double>(k + 3) / fact;
      power *= -r;
    }
    return sum;
  }
  const double r2 = r * r;
  const double r3 = r2 * r;
  const double r4 = r2 * r2;
  return 2.0 / (3.0 * r) - 1.0 / r2 + 2.0 / r4 - 2.0 * std::exp(-r) * (1.0 / r3 + 1.0 / r4);
}

double self_off(double r) {
  if (r < 1.0) {
    // sum_k (-1)^k (k+2)(k+3)/(k+4)! r^k
    double sum = 0.0;
    double fact = 24.0;
    double power = 1.0;
    for (int k = 0; k < 24; ++k) {
      if (k > 0) fact *= static_cast<double>(k + 4);
      sum += power * static_cast<double>((k + 2) * (k + 3)) / fact;
      power *= -r;
    }
    return sum;
  }
  const double r2 = r * r;
  const double r3 = r2 * r;
  const double r4 = r2 * r2;
  return 1.0 / (3.0 * r) + std::exp(-r) * (1.0 / r2 + 2.0 / r3 + 2.0 / r4) - 2.0 / r4;
}

void channel_samples(std::span<const double> phases, std::vector<double>& x1, std::vector<double>& x2) {
  x1.resize(phases.size());
  x2.resize(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const double c = std::cos(phases[k]);
    x1[k] = c * c;
    x2[k] = std::sin(2.0 * phases[k]);
  }
}

// \int_Omega^\infty G(omega) / omega^2 domega
double spectral_tail_weight(const BathModel& b, double omega) {
  const double flat = b.corr_norm * b.gamma / std::numbers::pi;
  if (b.markovian()) return flat / omega;
  const double y = omega * b.t_c;
  double bracket = 0.0;  // 1 - y atan(1/y)
  if (y > 10.0) {
    const double iy2 = 1.0 / (y * y);
    bracket = iy2 * (1.0 / 3.0 - iy2 * (1.0 / 5.0 - iy2 * (1.0 / 7.0 - iy2 / 9.0)));
  } else {
    bracket = 1.0 - y * std::atan(1.0 / y);
  }
  return flat * bracket / omega;
}

}  // namespace

std::complex<double> windowed_transform(std::span<const double> samples, double t_f, double omega) {
  const std::size_t n = samples.size() - 1;
  const double h = t_f / static_cast<double>(n);
  const std::complex<double> z(0.0, omega * h);
  const std::complex<double> q0 = h * detail::hat_moment0(z);
  const std::complex<double> q1 = h * detail::hat_moment1(z);
  const std::complex<double> step = std::polar(1.0, -omega * h);
  std::complex<double> phase(1.0, 0.0);
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (m % 64 == 0) phase = std::polar(1.0, -omega * h * static_cast<double>(m));
    acc += phase * (samples[m] * q0 + samples[m + 1] * q1);
    phase *= step;
  }
  return acc;
}

double modulation_spectrum(const Pulse& p, double omega) {
  std::vector<double> x1;
  std::vector<double> x2;
  channel_samples(p.phases(), x1, x2);
  return kPopulationWeight * std::norm(windowed_transform(x1, p.t_f(), omega)) +
         kCoherenceWeight * std::norm(windowed_transform(x2, p.t_f(), omega));
}

FrequencyOverlap frequency_overlap(const Pulse& p, const BathModel& b, const FrequencyQuadrature& q) {
  b.validate();
  FrequencyOverlap out;
  if (b.gamma == 0.0) return out;

  std::vector<double> x1;
  std::vector<double> x2;
  channel_samples(p.phases(), x1, x2);
  const double t_f = p.t_f();
  const double n = static_cast<double>(p.segments());

  // Panels end on multiples of pi / t_f so the oscillating endpoint cross term of the tail
  // vanishes at the cutoff.
  const double half_period = std::numbers::pi / t_f;
  double omega_max = q.omega_max;
  if (omega_max <= 0.0) {
    omega_max = 40.0 * n / t_f;
    if (!b.markovian()) omega_max = std::max(omega_max, 40.0 / b.t_c);
  }
  const auto periods = static_cast<std::size_t>(std::ceil(omega_max / half_period));
  omega_max = static_cast<double>(std::max<std::size_t>(periods, 2)) * half_period;
  // an even number of half periods puts omega_max / 2 on a panel boundary too
  auto total_periods = static_cast<std::size_t>(std::llround(omega_max / half_period));
  if (total_periods % 2 == 1) {
    ++total_periods;
    omega_max = static_cast<double>(total_periods) * half_period;
  }

  const auto integrand = [&](double w) {
    const double f = kPopulationWeight * std::norm(windowed_transform(x1, t_f, w)) +
                     kCoherenceWeight * std::norm(windowed_transform(x2, t_f, w));
    return spectrum(b, w) * f;
  };

  using GL = boost::math::quadrature::gauss<double, 16>;
  const auto integrate_panel = [&](double lo, double hi, std::size_t subdivisions) {
    double s = 0.0;
    const double width = (hi - lo) / static_cast<double>(subdivisions);
    for (std::size_t i = 0; i < subdivisions; ++i) {
      const double a = lo + width * static_cast<double>(i);
      s += GL::integrate(integrand, a, a + width);
    }
    return s;
  };

  // Lorentzian-aware refinement: panels no wider than t_c^-1 / 4 until |omega| ~ 40 / t_c.
  const auto subdivisions_at = [&](double lo) -> std::size_t {
    std::size_t sub = static_cast<std::size_t>(std::max(1, q.panels_per_half_period));
    if (!b.markovian() && lo < 40.0 / b.t_c) {
      sub = std::max(sub, static_cast<std::size_t>(std::ceil(half_period * b.t_c * 4.0)));
    }
    return sub;
  };

  const std::size_t half = total_periods / 2;
  double lower = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    const double lo = half_period * static_cast<double>(k);
    lower += integrate_panel(lo, lo + half_period, subdivisions_at(lo));
  }
  double upper = 0.0;
  for (std::size_t k = half; k < total_periods; ++k) {
    const double lo = half_period * static_cast<double>(k);
    upper += integrate_panel(lo, lo + half_period, subdivisions_at(lo));
  }

  // Leading large-|omega| behaviour |X|^2 ~ (x(0)^2 + x(t_f)^2) / omega^2.
  const double endpoint = kPopulationWeight * (x1.front() * x1.front() + x1.back() * x1.back()) +
                          kCoherenceWeight * (x2.front() * x2.front() + x2.back() * x2.back());
  const double tail_full = 2.0 * endpoint * spectral_tail_weight(b, omega_max);
  const double tail_half = 2.0 * endpoint * spectral_tail_weight(b, omega_max / 2.0);

  out.omega_max = omega_max;
  out.tail = tail_full;
  out.value = 2.0 * (lower + upper) + tail_full;
  const double coarse = 2.0 * lower + tail_half;
  out.remainder = std::abs(out.value - coarse);
  return out;
}

double infidelity_freq(const Pulse& p, const BathModel& b, const FrequencyQuadrature& q) {
  const auto r = frequency_overlap(p, b, q);
  if (r.remainder > q.tail_tolerance * std::abs(r.value)) {
    throw std::runtime_error("infidelity_freq: frequency cutoff too small (remainder " +
                             std::to_string(r.remainder / std::abs(r.value)) + " of total)");
  }
  return r.value;
}

DephasingKernel::DephasingKernel(const BathModel& b, std::size_t segments, double t_f)
    : n_(segments + 1), k_(n_ * n_, 0.0) {
  b.validate();
  if (b.markovian()) throw std::invalid_argument("DephasingKernel requires t_c > 0");
  if (segments < 2 || !(t_f > 0.0)) throw std::invalid_argument("DephasingKernel: invalid grid");
  const double h = t_f / static_cast<double>(segments);
  const double amp = b.corr_norm * b.gamma / b.t_c;
  const double r = h / b.t_c;

  // Segments m > n interact through the separable factor e^{-(tau - tau')/t_c}.
  const double a0 = h * detail::hat_moment0(r);  // \int_0^h (1 - u/h) e^{-u/t_c}
  const double a1 = h * detail::hat_moment1(r);  // \int_0^h (u/h) e^{-u/t_c}
  const std::array<double, 2> later{a0, a1};
  const std::array<double, 2> earlier{a1, a0};  // \int_0^h p_j(v) e^{-(h - v)/t_c}
  const double sd = amp * h * h * self_diag(r);
  const double so = amp * h * h * self_off(r);

  std::vector<double> decay(segments);
  for (std::size_t d = 0; d < segments; ++d) decay[d] = amp * std::exp(-static_cast<double>(d) * r);

  auto at = [this](std::size_t j, std::size_t k) -> double& { return k_[j * n_ + k]; };
  for (std::size_t m = 0; m < segments; ++m) {
    at(m, m) += sd;
    at(m + 1, m + 1) += sd;
    at(m, m + 1) += so;
    at(m + 1, m) += so;
    for (std::size_t s = 0; s < m; ++s) {
      const double f = decay[m - s - 1];
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          const double v = f * later[i] * earlier[j];
          at(m + i, s + j) += v;
          at(s + j, m + i) += v;
        }
      }
    }
  }
}

void DephasingKernel::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < n_; ++j) {
    const double* row = &k_[j * n_];
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) s += row[k] * x[k];
    out[j] = s;
  }
}

double DephasingKernel::quadratic_form(std::span<const double> x) const {
  std::vector<double> kx(n_);
  apply(x, kx);
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += x[j] * kx[j];
  return s;
}

InfidelityModel::InfidelityModel(const BathModel& b, std::size_t segments, double t_f)
    : bath_(b), segments_(segments), t_f_(t_f) {
  b.validate();
  if (segments < 2 || !(t_f > 0.0)) throw std::invalid_argument("InfidelityModel: invalid grid");
  if (b.markovian()) {
    const double h = t_f / static_cast<double>(segments);
    markov_weights_.assign(segments + 1, b.white_noise_intensity() * h);
    markov_weights_.front() *= 0.5;
    markov_weights_.back() *= 0.5;
  } else {
    kernel_.emplace(b, segments, t_f);
  }
}

double InfidelityModel::value(std::span<const double> phases) const {
  std::vector<double> x1;
  std::vector<double> x2;
  channel_samples(phases, x1, x2);
  if (!kernel_) {
    double s = 0.0;
    for (std::size_t k = 0; k < x1.size(); ++k) {
      s += markov_weights_[k] * (kPopulationWeight * x1[k] * x1[k] + kCoherenceWeight * x2[k] * x2[k]);
    }
    return s;
  }
  return kPopulationWeight * kernel_->quadratic_form(x1) + kCoherenceWeight * kernel_->quadratic_form(x2);
}

double InfidelityModel::value_and_gradient(std::span<const double> phases, std::span<double> grad) const {
  std::vector<double> x1;
  std::vector<double> x2;
  channel_samples(phases, x1, x2);
  const std::size_t n = x1.size();
  std::vector<double> k1(n);
  std::vector<double> k2(n);
  if (kernel_) {
    kernel_->apply(x1, k1);
    kernel_->apply(x2, k2);
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      k1[k] = markov_weights_[k] * x1[k];
      k2[k] = markov_weights_[k] * x2[k];
    }
  }
  double value = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    value += kPopulationWeight * x1[k] * k1[k] + kCoherenceWeight * x2[k] * k2[k];
    // d cos^2(phi) = -sin(2 phi), d sin(2 phi) = 2 cos(2 phi)
    grad[k] = 2.0 * kPopulationWeight * k1[k] * (-x2[k]) +
              2.0 * kCoherenceWeight * k2[k] * 2.0 * std::cos(2.0 * phases[k]);
  }
  return value;
}

double infidelity_time(const Pulse& p, const BathModel& b) {
  b.validate();
  if (b.markovian()) throw std::invalid_argument("infidelity_time requires t_c > 0");
  if (b.gamma == 0.0) return 0.0;
  return InfidelityModel(b, p.segments(), p.t_f()).value(p.phases());
}

double infidelity_markovian(const Pulse& p, double gamma) {
  BathModel b;
  b.gamma = gamma;
  b.corr_norm = kDefaultCorrNorm;
  return infidelity_markovian(p, b);
}

double infidelity_markovian(const Pulse& p, const BathModel& b) {
  BathModel flat = b;
  flat.t_c = 0.0;
  return InfidelityModel(flat, p.segments(), p.t_f()).value(p.phases());
}

double bath_infidelity(const Pulse& p, const BathModel& b) {
  return b.markovian() ? infidelity_markovian(p, b) : infidelity_time(p, b);
}

std::vector<double> infidelity_gradient(const Pulse& p, const BathModel& b) {
  std::vector<double> full(p.samples());
  InfidelityModel(b, p.segments(), p.t_f()).value_and_gradient(p.phases(), full);
  return {full.begin() + 1, full.end() - 1};
}

}  // namespace xferopt
