#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "support.hpp"
#include "xferopt/fidelity.hpp"

using namespace xferopt;

namespace {

// x(t) for one channel, linear between the samples of f(phi_k).
double interp(const std::vector<double>& x, double h, double t) {
  const auto n = x.size() - 1;
  auto k = static_cast<std::size_t>(t / h);
  if (k >= n) k = n - 1;
  const double u = t / h - static_cast<double>(k);
  return x[k] + u * (x[k + 1] - x[k]);
}

// Direct double integral of Phi(t - s) [2/3 x1 x1' + 1/2 x2 x2'] with Gauss panels aligned to the
// grid and to the kink of Phi at t = s.
double brute_force_time(const Pulse& p, const BathModel& b, int panels_per_segment) {
  const std::size_t n = p.segments();
  const double h = p.dt();
  std::vector<double> x1(n + 1), x2(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    x1[k] = std::cos(p.phase(k)) * std::cos(p.phase(k));
    x2[k] = std::sin(2.0 * p.phase(k));
  }
  const auto inner = [&](double t) {
    const auto f = [&](double s) {
      return correlation(b, t - s) *
             (2.0 / 3.0 * interp(x1, h, t) * interp(x1, h, s) + 0.5 * interp(x2, h, t) * interp(x2, h, s));
    };
    double sum = 0.0;
    // nodes plus t split [0, t_f] into smooth pieces
    std::vector<double> cuts{0.0, t};
    for (std::size_t k = 1; k < n; ++k) cuts.push_back(h * static_cast<double>(k));
    cuts.push_back(p.t_f());
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) sum += testing::integrate(f, cuts[i], cuts[i + 1], panels_per_segment);
    }
    return sum;
  };
  return testing::integrate(inner, 0.0, p.t_f(), static_cast<int>(n) * panels_per_segment);
}

}  // namespace

TEST_CASE("time-domain kernel equals a brute-force double integral") {
  std::mt19937_64 rng(21);
  for (double t_c : {0.03, 0.4, 5.0}) {
    const BathModel b{1.0, t_c};
    const Pulse p = testing::random_pulse(rng, 2.0, 10);
    const double exact = infidelity_time(p, b);
    const double brute = brute_force_time(p, b, 4);
    CHECK(exact == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("fastest pulse under white noise gives gamma pi^2 / 8E") {
  for (double e : {1.0, kHalfPi * kHalfPi, 7.0}) {
    const EnergyBudget budget(e);
    const double gamma = 0.37;
    const double expected = gamma * std::numbers::pi * std::numbers::pi / (8.0 * e);
    CHECK(infidelity_markovian(fastest_pulse(budget, 512), gamma) == doctest::Approx(expected).epsilon(1e-5));
    CHECK(bath_infidelity(fastest_pulse(budget, 512), BathModel{gamma, 0.0}) ==
          doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("short memory approaches the Markovian limit") {
  std::mt19937_64 rng(5);
  const Pulse p = testing::random_pulse(rng, 1.0, 2000, 3, 0.3);
  const double markov = infidelity_markovian(p, 1.0);
  const double t_c = 1e-3;
  CHECK(infidelity_time(p, BathModel{1.0, t_c}) == doctest::Approx(markov).epsilon(5e-3));
  // the deviation shrinks with t_c
  const double d1 = std::abs(infidelity_time(p, BathModel{1.0, 4e-3}) - markov);
  const double d2 = std::abs(infidelity_time(p, BathModel{1.0, 2e-3}) - markov);
  CHECK(d2 < d1);
}

TEST_CASE("zero coupling gives zero infidelity") {
  const Pulse p = fastest_pulse(EnergyBudget(2.0), 32);
  CHECK(infidelity_time(p, BathModel{0.0, 1.0}) == 0.0);
  CHECK(infidelity_freq(p, BathModel{0.0, 1.0}) == 0.0);
  CHECK(infidelity_markovian(p, 0.0) == 0.0);
  CHECK_THROWS_AS(infidelity_time(p, BathModel{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("windowed transform matches numerical quadrature") {
  std::mt19937_64 rng(8);
  const Pulse p = testing::random_pulse(rng, 3.0, 12);
  std::vector<double> x(p.phases().begin(), p.phases().end());
  const double h = p.dt();
  for (double w : {0.0, 0.3, 2.5, 40.0}) {
    const auto re = testing::integrate([&](double t) { return interp(x, h, t) * std::cos(w * t); }, 0.0, 3.0, 12 * 40);
    const auto im = testing::integrate([&](double t) { return -interp(x, h, t) * std::sin(w * t); }, 0.0, 3.0, 12 * 40);
    const auto got = windowed_transform(x, 3.0, w);
    CHECK(got.real() == doctest::Approx(re).epsilon(1e-10));
    CHECK(got.imag() == doctest::Approx(im).epsilon(1e-10));
  }
}

TEST_CASE("frequency and time routes agree on random pulses") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double t_f = 1.0 + 5.0 * u(rng);
    const BathModel b{1.0, std::pow(10.0, -1.0 + 2.0 * u(rng))};
    const Pulse p = testing::random_pulse(rng, t_f, 48);
    const double t = infidelity_time(p, b);
    const double f = infidelity_freq(p, b);
    CHECK(std::abs(f - t) / t < 1e-6);
  }
}

TEST_CASE("too small a frequency cutoff is reported") {
  std::mt19937_64 rng(2);
  const Pulse p = testing::random_pulse(rng, 2.0, 64, 12, 1.0);
  FrequencyQuadrature q;
  q.omega_max = 3.0;
  CHECK_THROWS_AS(infidelity_freq(p, BathModel{1.0, 0.01}, q), std::runtime_error);
  const auto diag = frequency_overlap(p, BathModel{1.0, 0.01}, q);
  CHECK(diag.remainder > 0.0);
  CHECK(diag.tail > 0.0);
}

TEST_CASE("dephasing kernel is symmetric and positive semidefinite") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const DephasingKernel k(BathModel{1.0, 0.3}, 30, 2.0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) CHECK(k(i, j) == doctest::Approx(k(j, i)).epsilon(1e-14));
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(k.size());
    for (double& v : x) v = g(rng);
    CHECK(k.quadratic_form(x) >= 0.0);
  }
}

TEST_CASE("hat moments are continuous across the series switch") {
  for (double z : {0.999999, 1.000001, -0.999999, -1.000001}) {
    const double m0 = (z - 1.0 + std::exp(-z)) / (z * z);
    const double m1 = (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
    CHECK(detail::hat_moment0(z) == doctest::Approx(m0).epsilon(1e-12));
    CHECK(detail::hat_moment1(z) == doctest::Approx(m1).epsilon(1e-12));
  }
  const std::complex<double> z(0.0, 0.999999);
  const auto m0 = (z - 1.0 + std::exp(-z)) / (z * z);
  CHECK(std::abs(detail::hat_moment0(z) - m0) < 1e-12);
  CHECK(detail::hat_moment0(0.0) == 0.5);
  CHECK(detail::hat_moment1(0.0) == 0.5);
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(31);
  for (double t_c : {0.0, 0.2, 3.0}) {
    const BathModel b{0.9, t_c};
    const Pulse p = testing::random_pulse(rng, 2.5, 24);
    const auto grad = infidelity_gradient(p, b);
    REQUIRE(grad.size() == p.segments() - 1);
    const InfidelityModel model(b, p.segments(), p.t_f());
    std::vector<double> full(p.samples());
    const double v = model.value_and_gradient(p.phases(), full);
    CHECK(v == doctest::Approx(bath_infidelity(p, b)).epsilon(1e-13));
    const auto f = [&](const std::vector<double>& x) { return model.value(x); };
    std::vector<double> x(p.phases().begin(), p.phases().end());
    double scale = 0.0;
    for (double gk : full) scale = std::max(scale, std::abs(gk));
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double fd = testing::central_difference(f, x, k, 1e-5);
      CHECK(std::abs(full[k] - fd) <= 1e-5 * scale);
      if (k > 0 && k < p.segments()) CHECK(grad[k - 1] == doctest::Approx(full[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("holding at pi/2 costs nothing") {
  // both channels vanish at pi/2
  const Pulse p = fastest_pulse(EnergyBudget(kHalfPi * kHalfPi), 16);
  const Pulse q = extend_with_hold(p, 3.0, 48);
  CHECK(infidelity_markovian(q, 1.0) == doctest::Approx(infidelity_markovian(p, 1.0)).epsilon(1e-12));
  CHECK(modulation_spectrum(q, 0.0) == doctest::Approx(modulation_spectrum(p, 0.0)).epsilon(1e-12));
}

TEST_CASE("modulation spectrum is nonnegative") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Pulse p = testing::random_pulse(rng, 3.0, 40);
    for (double w = -30.0; w <= 30.0; w += 0.71) CHECK(modulation_spectrum(p, w) >= 0.0);
  }
}

TEST_CASE("infidelity is stable under grid refinement") {
  // smooth pulse sampled from one analytic curve at N and 2N
  const auto sampled = [](std::size_t n) {
    std::vector<double> phi(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(n);
      phi[k] = kHalfPi * s + 0.4 * std::sin(std::numbers::pi * s) + 0.1 * std::sin(3.0 * std::numbers::pi * s);
    }
    return Pulse(phi, 4.0);
  };
  for (double t_c : {0.0, 0.5, 5.0}) {
    const BathModel b{1.0, t_c};
    const double coarse = bath_infidelity(sampled(128), b);
    const double fine = bath_infidelity(sampled(256), b);
    CHECK(std::abs(fine / coarse - 1.0) < 1e-3);
  }
}

TEST_CASE("zero coupling gives a zero gradient") {
  std::mt19937_64 rng(43);
  const Pulse p = testing::random_pulse(rng, 2.0, 30);
  for (double t_c : {0.0, 1.0}) {
    for (double g : infidelity_gradient(p, BathModel{0.0, t_c})) CHECK(g == 0.0);
  }
}
