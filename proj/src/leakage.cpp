#include "xferopt/leakage.hpp"

#include <cmath>
#include <stdexcept>

namespace xferopt {

namespace {

constexpr Complex kI{0.0, 1.0};

struct DriveTerms {
  double c;   // cos(Omega dt)
  double s;   // sin(Omega dt) / Omega
  double ds;  // d s / d v
  double dc;  // d c / d v
};

DriveTerms drive_terms(double omega0, double v, double dt) {
  const double big = std::hypot(omega0, v);
  const double x = big * dt;
  DriveTerms t{};
  t.c = std::cos(x);
  if (x < 1e-4) {
    const double x2 = x * x;
    t.s = dt * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
    t.ds = v * (-dt * dt * dt / 3.0) * (1.0 - x2 / 10.0);
  } else {
    t.s = std::sin(x) / big;
    t.ds = v * (dt * t.c - t.s) / (big * big);
  }
  t.dc = -t.s * dt * v;
  return t;
}

void check_omega0(double omega0) {
  if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw std::invalid_argument("omega0 must be >= 0");
}

}  // namespace

SegmentPropagator::SegmentPropagator(double omega0, double v, double dt) {
  const auto t = drive_terms(omega0, v, dt);
  m00 = Complex(t.c, t.s * omega0);
  m11 = Complex(t.c, -t.s * omega0);
  m01 = Complex(0.0, -t.s * v);
  m10 = m01;
}

EvenState propagate_even(const Pulse& p, double omega0, const EvenState& initial) {
  check_omega0(omega0);
  EvenState s = initial;
  const double h = p.dt();
  for (double v : p.amplitudes()) s = SegmentPropagator(omega0, v, h).apply(s);
  return s;
}

std::vector<EvenState> even_trajectory(const Pulse& p, double omega0, const EvenState& initial) {
  check_omega0(omega0);
  std::vector<EvenState> out;
  out.reserve(p.samples());
  out.push_back(initial);
  const double h = p.dt();
  for (double v : p.amplitudes()) out.push_back(SegmentPropagator(omega0, v, h).apply(out.back()));
  return out;
}

Complex perturbative_leakage_amplitude(const Pulse& p, double omega0) {
  check_omega0(omega0);
  const double h = p.dt();
  const double theta = 2.0 * omega0 * h;
  // \int_0^h e^{i theta u / h} du
  const Complex segment = std::abs(theta) < 1e-8 ? Complex(h, 0.5 * h * theta)
                                                 : h * (std::exp(kI * theta) - 1.0) / (kI * theta);
  const auto v = p.amplitudes();
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += v[k] * std::polar(1.0, 2.0 * omega0 * p.time(k)) * segment;
  }
  return -kI * acc;
}

double leakage_and_gradient(std::span<const double> phases, double t_f, double omega0, std::span<double> grad) {
  check_omega0(omega0);
  const std::size_t n = phases.size() - 1;
  const double h = t_f / static_cast<double>(n);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = (phases[k + 1] - phases[k]) / h;

  std::vector<DriveTerms> terms(n);
  std::vector<EvenState> forward(n + 1);
  forward[0] = EvenState{};
  for (std::size_t k = 0; k < n; ++k) {
    terms[k] = drive_terms(omega0, v[k], h);
    forward[k + 1] = SegmentPropagator(omega0, v[k], h).apply(forward[k]);
  }
  const Complex amp = forward[n].amp_ee;

  // Row vector <ee| U_{n-1} ... U_{k+1}, swept backwards.
  Complex row_gg{0.0, 0.0};
  Complex row_ee{1.0, 0.0};
  std::vector<double> dv(n);
  for (std::size_t k = n; k-- > 0;) {
    const auto& t = terms[k];
    // dU/dv = dc I - i ds (w0 sz + v sx) - i s sx
    const Complex d00(t.dc, t.ds * omega0);
    const Complex d11(t.dc, -t.ds * omega0);
    const Complex d01(0.0, -(t.ds * v[k] + t.s));
    const auto& psi = forward[k];
    const Complex dgg = d00 * psi.amp_gg + d01 * psi.amp_ee;
    const Complex dee = d01 * psi.amp_gg + d11 * psi.amp_ee;
    const Complex damp = row_gg * dgg + row_ee * dee;
    dv[k] = 2.0 * std::real(std::conj(amp) * damp);

    const SegmentPropagator u(omega0, v[k], h);
    const Complex g = row_gg * u.m00 + row_ee * u.m10;
    const Complex e = row_gg * u.m01 + row_ee * u.m11;
    row_gg = g;
    row_ee = e;
  }
  for (std::size_t j = 0; j <= n; ++j) {
    double d = 0.0;
    if (j > 0) d += dv[j - 1];
    if (j < n) d -= dv[j];
    grad[j] = d / h;
  }
  return std::norm(amp);
}

double corrector_energy_estimate(double psi_ee, double available_time, double kappa) {
  if (!(psi_ee >= 0.0 && psi_ee < 1.0)) throw std::invalid_argument("psi_ee must lie in [0, 1)");
  if (!(available_time > 0.0)) throw std::invalid_argument("available time must be positive");
  return kappa * psi_ee * psi_ee / available_time;
}

namespace {

Pulse sinusoidal_drive(double a, double b, double omega0, double T, std::size_t segments) {
  const double w = 2.0 * omega0;
  std::vector<double> phi(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(segments);
    // \int_0^t a sin(w s) + b cos(w s) ds
    phi[k] = a * (1.0 - std::cos(w * t)) / w + b * std::sin(w * t) / w;
  }
  phi.front() = 0.0;
  return Pulse(std::move(phi), T);
}

}  // namespace

Corrector minimal_corrector(const EvenState& leaked, double omega0, double available_time,
                            std::size_t segments) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("minimal_corrector requires omega0 > 0");
  if (!(available_time > 0.0)) throw std::invalid_argument("available time must be positive");
  const double mag_ee = std::abs(leaked.amp_ee);
  const double mag_gg = std::abs(leaked.amp_gg);
  Corrector out{0.0, 0.0, 0.0, leaked.leakage(), sinusoidal_drive(0.0, 0.0, omega0, available_time, segments)};
  if (mag_ee == 0.0) return out;

  // Rotating-wave estimate: the e^{-2 i w0 t} part of V couples gg and ee with g = (b + i a) / 2.
  const double angle = std::atan2(mag_ee, mag_gg);
  const Complex g = (angle / available_time) * (-kI) * (leaked.amp_ee / mag_ee) * (mag_gg / leaked.amp_gg);
  double a = 2.0 * g.imag();
  double b = 2.0 * g.real();

  const auto residual = [&](double aa, double bb) {
    const auto s = propagate_even(sinusoidal_drive(aa, bb, omega0, available_time, segments), omega0, leaked);
    return s.amp_ee;
  };

  Complex r = residual(a, b);
  for (int it = 0; it < 50 && std::abs(r) > 1e-13; ++it) {
    const double step = 1e-6 * std::max(std::hypot(a, b), 1e-8);
    const Complex ra = (residual(a + step, b) - residual(a - step, b)) / (2.0 * step);
    const Complex rb = (residual(a, b + step) - residual(a, b - step)) / (2.0 * step);
    // Solve [Re ra, Re rb; Im ra, Im rb] [da; db] = -[Re r; Im r]
    const double det = ra.real() * rb.imag() - rb.real() * ra.imag();
    if (det == 0.0) break;
    const double da = (-r.real() * rb.imag() + rb.real() * r.imag()) / det;
    const double db = (-ra.real() * r.imag() + ra.imag() * r.real()) / det;
    a += da;
    b += db;
    r = residual(a, b);
  }

  out.sin_amplitude = a;
  out.cos_amplitude = b;
  out.drive = sinusoidal_drive(a, b, omega0, available_time, segments);
  out.energy = pulse_energy(out.drive);
  out.residual_leakage = std::norm(r);
  return out;
}

CorrectorScaling corrector_scaling(const EvenState& leaked, double omega0, std::span<const double> times,
                                   double segments_per_unit_time) {
  if (times.size() < 2) throw std::invalid_argument("corrector_scaling needs at least two times");
  CorrectorScaling out;
  const double psi2 = leaked.leakage();
  for (double T : times) {
    const auto segments = static_cast<std::size_t>(std::ceil(T * segments_per_unit_time));
    out.times.push_back(T);
    out.energies.push_back(minimal_corrector(leaked, omega0, T, std::max<std::size_t>(segments, 2)).energy);
  }
  // least squares of log E on log T
  const double n = static_cast<double>(times.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double lx = std::log(out.times[i]);
    const double ly = std::log(out.energies[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double u = psi2 / out.times[i];
    num += out.energies[i] * u;
    den += u * u;
  }
  out.kappa = num / den;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double fit = out.kappa * psi2 / out.times[i];
    out.max_residual = std::max(out.max_residual, std::abs(out.energies[i] - fit) / out.energies[i]);
  }
  return out;
}

}  // namespace xferopt
