#include "xferopt/markovian.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace xferopt {

namespace {

constexpr double kLinearizeBelow = 1e-6;  // switch to the exponential tail
constexpr double kProfileEnd = 1e-10;     // stop sampling when pi/2 - phi drops below this
constexpr double kTruncatePulse = 1e-8;
constexpr double kMaxStep = 0.01;

}  // namespace

double markovian_rate(double phi) {
  // sqrt(2/3 cos^4 + 1/2 sin^2 2phi) = |cos phi| sqrt(2/3 cos^2 + 2 sin^2)
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return std::abs(c) * std::sqrt(2.0 / 3.0 * c * c + 2.0 * s * s);
}

double MarkovianProfile::phase_at(double xq) const {
  if (xq <= 0.0) return 0.0;
  if (xq >= x.back()) return kHalfPi;
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const auto i = static_cast<std::size_t>(std::distance(x.begin(), it)) - 1;
  const double h = x[i + 1] - x[i];
  const double s = (xq - x[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * phi[i] + (s3 - 2 * s2 + s) * h * dphi[i] + (-2 * s3 + 3 * s2) * phi[i + 1] +
         (s3 - s2) * h * dphi[i + 1];
}

MarkovianProfile solve_markovian_profile(double tol) {
  if (!(tol >= 1e-12 && tol <= 1e-4)) {
    throw std::invalid_argument("solve_markovian_profile: tolerance must lie in [1e-12, 1e-4]");
  }
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;

  MarkovianProfile prof;
  const auto rhs = [](const State& y, State& dydx, double /*x*/) { dydx[0] = markovian_rate(y[0]); };
  auto stepper = odeint::make_controlled(tol * 1e-2, tol, odeint::runge_kutta_dopri5<State>());

  State y{0.0};
  double x = 0.0;
  double dx = 1e-3;
  prof.x.push_back(0.0);
  prof.phi.push_back(0.0);
  prof.dphi.push_back(markovian_rate(0.0));
  while (kHalfPi - y[0] >= kLinearizeBelow) {
    dx = std::min(dx, kMaxStep);
    if (stepper.try_step(rhs, y, x, dx) == odeint::success) {
      prof.x.push_back(x);
      prof.phi.push_back(y[0]);
      prof.dphi.push_back(markovian_rate(y[0]));
    }
    if (x > 1e3) throw std::runtime_error("solve_markovian_profile: no convergence towards pi/2");
  }

  // Near pi/2 the equation linearizes to eps' = -sqrt(2) eps with eps = pi/2 - phi.
  const double eps0 = kHalfPi - y[0];
  const double x0 = x;
  const double decay = std::sqrt(2.0);
  double eps = eps0;
  while (eps >= kProfileEnd) {
    x += kMaxStep;
    eps = eps0 * std::exp(-decay * (x - x0));
    prof.x.push_back(x);
    prof.phi.push_back(kHalfPi - eps);
    prof.dphi.push_back(decay * eps);
  }

  prof.energy = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(markovian_rate, 0.0, kHalfPi,
                                                                              15, 1e-14);
  return prof;
}

const MarkovianProfile& default_markovian_profile() {
  static const MarkovianProfile profile = solve_markovian_profile();
  return profile;
}

Pulse optimal_markovian_pulse(const EnergyBudget& budget, std::size_t segments) {
  return optimal_markovian_pulse(default_markovian_profile(), budget, segments);
}

Pulse optimal_markovian_pulse(const MarkovianProfile& profile, const EnergyBudget& budget,
                              std::size_t segments) {
  if (segments < 2) throw std::invalid_argument("optimal_markovian_pulse needs at least 2 segments");
  const double rate = budget.energy() / profile.energy;
  const auto it = std::find_if(profile.phi.begin(), profile.phi.end(),
                               [](double p) { return kHalfPi - p < kTruncatePulse; });
  const double x_cut = profile.x[static_cast<std::size_t>(std::distance(profile.phi.begin(), it))];
  const double t_f = x_cut / rate;
  std::vector<double> phi(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    phi[k] = profile.phase_at(rate * t_f * static_cast<double>(k) / static_cast<double>(segments));
  }
  phi.front() = 0.0;
  phi.back() = kHalfPi;
  return Pulse(std::move(phi), t_f);
}

double markovian_optimum_infidelity(double gamma, double energy) {
  return markovian_optimum_infidelity(default_markovian_profile(), gamma, energy);
}

double markovian_optimum_infidelity(const MarkovianProfile& profile, double gamma, double energy) {
  if (!(energy > 0.0)) throw std::invalid_argument("markovian_optimum_infidelity: energy must be positive");
  return gamma * profile.energy * profile.energy / energy;
}

}  // namespace xferopt
