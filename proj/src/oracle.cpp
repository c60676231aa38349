#include "xferopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xferopt/fidelity.hpp"
#include "xferopt/leakage.hpp"
#include "xferopt/parallel.hpp"
#include "xferopt/random.hpp"

namespace xferopt {

namespace {

constexpr std::size_t kBlock = 256;

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double norm_error = 0.0;

  void add(double v) {
    n += 1.0;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
    norm_error = std::max(norm_error, o.norm_error);
  }
};

// exp(-i (x sigma_x + z sigma_z) dt) with sigma_z = diag(-1, +1).
struct Rotation {
  Complex d0, d1, off;

  Rotation(double x, double z, double dt) {
    const double w = std::hypot(x, z);
    const double c = std::cos(w * dt);
    const double s = w * dt < 1e-8 ? dt : std::sin(w * dt) / w;
    d0 = Complex(c, s * z);
    d1 = Complex(c, -s * z);
    off = Complex(0.0, -s * x);
  }
  void apply(Complex& u0, Complex& u1) const {
    const Complex n0 = d0 * u0 + off * u1;
    u1 = off * u0 + d1 * u1;
    u0 = n0;
  }
};

}  // namespace

void OracleConfig::validate() const {
  if (n_traj < 1) throw std::invalid_argument("oracle: n_traj must be >= 1");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("oracle: dt must be >= 0");
  if (!rwa && !include_even) {
    throw std::invalid_argument("oracle: counter-rotating terms act on the even sector, so rwa = false needs include_even");
  }
}

double max_oracle_step(const Pulse& p, const BathModel& b, double omega0, const OracleConfig& cfg) {
  double step = p.dt();
  if (!b.markovian()) step = std::min(step, b.t_c / 10.0);
  if (!cfg.rwa && omega0 > 0.0) step = std::min(step, 0.01 / omega0);
  return step;
}

double six_state_fidelity(Complex a, Complex c) {
  return (std::norm(a) + std::norm(c) + std::norm(a + c)) / 6.0;
}

FidelityEstimate simulate_transfer(const Pulse& p, const BathModel& b, double omega0, const OracleConfig& cfg) {
  cfg.validate();
  b.validate();
  if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw std::invalid_argument("oracle: omega0 must be >= 0");
  const double limit = max_oracle_step(p, b, omega0, cfg);
  if (cfg.dt > limit * (1.0 + 1e-12)) {
    throw std::invalid_argument("oracle: dt = " + std::to_string(cfg.dt) + " exceeds the allowed step " +
                                std::to_string(limit) + " (t_c/10, t_f/N and 0.01/omega0 without RWA)");
  }
  const double target = cfg.dt > 0.0 ? cfg.dt : limit;
  const std::size_t sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.dt() / target - 1e-9)));
  const double dt = p.dt() / static_cast<double>(sub);
  const std::size_t steps = p.segments() * sub;
  const auto v = p.amplitudes();
  const bool lab_even = cfg.include_even && !cfg.rwa;
  const double white = std::sqrt(b.white_noise_intensity() / dt);
  const Complex frame = std::polar(1.0, -omega0 * p.t_f());

  const std::size_t blocks = (cfg.n_traj + kBlock - 1) / kBlock;
  std::vector<Moments> partial(blocks);
  const std::size_t workers = cfg.workers == 0 ? worker_count() : cfg.workers;

  parallel_for(
      blocks,
      [&](std::size_t blk) {
        std::vector<double> noise(steps);
        const CounterNormal normal(cfg.seed);
        Moments m;
        const std::size_t first = blk * kBlock;
        const std::size_t last = std::min(cfg.n_traj, first + kBlock);
        for (std::size_t traj = first; traj < last; ++traj) {
          if (b.gamma == 0.0) {
            std::fill(noise.begin(), noise.end(), 0.0);
          } else if (b.markovian()) {
            for (std::size_t k = 0; k < steps; ++k) noise[k] = white * normal(traj, k);
          } else {
            sample_noise_trajectory(b, dt, cfg.seed, traj, noise);
          }
          Complex ge{0.0, 0.0}, eg{1.0, 0.0};
          Complex gg{1.0, 0.0}, ee{0.0, 0.0};
          double phase = 0.0;
          for (std::size_t k = 0; k < steps; ++k) {
            const double vk = v[k / sub];
            const double bk = noise[k];
            Rotation(vk, bk, dt).apply(ge, eg);
            if (lab_even) {
              Rotation(vk, omega0 + bk, dt).apply(gg, ee);
            } else {
              phase += bk * dt;
            }
          }
          Complex a{1.0, 0.0};
          if (lab_even) {
            a = gg * frame;
          } else if (cfg.include_even) {
            a = std::polar(1.0, phase);
          }
          const Complex c = Complex(0.0, 1.0) * ge;
          const double loss = ((1.0 - std::norm(a)) + (1.0 - std::norm(c)) + (4.0 - std::norm(a + c))) / 6.0;
          m.add(loss);
          double err = std::abs(std::norm(ge) + std::norm(eg) - 1.0);
          if (lab_even) err = std::max(err, std::abs(std::norm(gg) + std::norm(ee) - 1.0));
          m.norm_error = std::max(m.norm_error, err);
        }
        partial[blk] = m;
      },
      workers);

  Moments total;
  for (const auto& m : partial) total.merge(m);
  FidelityEstimate out;
  out.n_traj = cfg.n_traj;
  out.infidelity = total.mean;
  out.mean = 1.0 - total.mean;
  out.std_error = total.n > 1.0 ? std::sqrt(total.m2 / (total.n - 1.0) / total.n) : 0.0;
  out.max_norm_error = total.norm_error;
  out.dt = dt;
  return out;
}

ShapeRatioReport shape_ratio_check(std::span<const Pulse> pulses, const BathModel& b, double omega0,
                                   const OracleConfig& cfg) {
  if (pulses.size() < 2) throw std::invalid_argument("shape_ratio_check needs at least two pulses");
  ShapeRatioReport out;
  for (const auto& p : pulses) {
    double predicted = bath_infidelity(p, b);
    if (!cfg.rwa && omega0 > 0.0) {
      const auto even = propagate_even(p, omega0);
      predicted += 1.0 - six_state_fidelity(even.amp_gg * std::polar(1.0, -omega0 * p.t_f()), Complex(1.0, 0.0));
    }
    if (!(predicted > 0.0) || predicted > 0.05) {
      throw std::invalid_argument("shape_ratio_check: predicted infidelity must lie in (0, 0.05]");
    }
    out.predicted.push_back(predicted);
  }
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    out.estimates.push_back(simulate_transfer(pulses[i], b, omega0, cfg));
    out.ratios.push_back(out.estimates.back().infidelity / out.predicted[i]);
  }
  const auto [lo, hi] = std::minmax_element(out.ratios.begin(), out.ratios.end());
  double sum = 0.0;
  for (double r : out.ratios) sum += r;
  out.mean_ratio = sum / static_cast<double>(out.ratios.size());
  out.spread = (*hi - *lo) / out.mean_ratio;
  return out;
}

}  // namespace xferopt
