#include "xferopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "xferopt/lbfgs.hpp"
#include "xferopt/leakage.hpp"
#include "xferopt/markovian.hpp"
#include "xferopt/parallel.hpp"

namespace xferopt {

EnergyMode parse_energy_mode(const std::string& s) {
  if (s == "equal") return EnergyMode::equal;
  if (s == "at_most") return EnergyMode::at_most;
  throw std::invalid_argument("energy mode must be 'equal' or 'at_most', got '" + s + "'");
}

std::string to_string(EnergyMode m) { return m == EnergyMode::equal ? "equal" : "at_most"; }

StartKind parse_start_kind(const std::string& s) {
  if (s == "ramp") return StartKind::ramp;
  if (s == "markovian") return StartKind::markovian;
  if (s == "overshoot") return StartKind::overshoot;
  throw std::invalid_argument("unknown start kind '" + s + "' (expected ramp, markovian or overshoot)");
}

std::string to_string(StartKind k) {
  switch (k) {
    case StartKind::ramp:
      return "ramp";
    case StartKind::markovian:
      return "markovian";
    case StartKind::overshoot:
      return "overshoot";
  }
  return "?";
}

namespace {

constexpr double kOvershootHeight = 0.3;
constexpr double kOvershootPeak = 0.4;
constexpr double kFeasibilitySlack = 1e-12;

bool at_minimum_time(const OptimizationProblem& prob) {
  return std::abs(prob.t_f - prob.budget.t_min()) <= kFeasibilitySlack * prob.budget.t_min();
}

std::vector<double> ramp_samples(std::size_t segments) {
  std::vector<double> r(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) r[k] = kHalfPi * static_cast<double>(k) / static_cast<double>(segments);
  return r;
}

Pulse ramp_pulse(std::size_t segments, double t_f) { return Pulse(ramp_samples(segments), t_f); }

// Solves tridiag(-1, 2, -1) u = r in place (Dirichlet Laplacian).
void laplacian_solve(std::span<double> r) {
  const std::size_t n = r.size();
  if (n == 0) return;
  std::vector<double> c(n);
  double denom = 2.0;
  c[0] = -1.0 / denom;
  r[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = 2.0 + c[i - 1];
    c[i] = -1.0 / denom;
    r[i] = (r[i] + r[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) r[i] -= c[i] * r[i + 1];
}

struct Evaluator {
  const OptimizationProblem& prob;
  const InfidelityModel& model;
  bool leakage;
  double scale;  // 1 / J_ref

  // Raw objective (bath + w P) and gradient w.r.t. all samples.
  double raw(std::span<const double> phases, std::span<double> grad) const {
    double j = model.value_and_gradient(phases, grad);
    if (leakage && prob.leak_weight > 0.0) {
      std::vector<double> gl(phases.size());
      const double p = leakage_and_gradient(phases, prob.t_f, prob.omega0, gl);
      j += prob.leak_weight * p;
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += prob.leak_weight * gl[k];
    }
    return j;
  }
};

double energy_of(std::span<const double> phases, double h) {
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < phases.size(); ++k) {
    const double d = phases[k + 1] - phases[k];
    e += d * d;
  }
  return e / h;
}

OptimizationResult finish(const OptimizationProblem& prob, const InfidelityModel& model, bool leakage, Pulse pulse) {
  OptimizationResult out{std::move(pulse), {}, 0.0, 0.0, {}, 0, false, 0, {}, {}, {}};
  const auto phases = out.pulse.phases();
  out.breakdown.bath_infidelity = model.value(phases);
  if (leakage) {
    out.leakage = propagate_even(out.pulse, prob.omega0).leakage();
    out.breakdown.leakage_penalty = prob.leak_weight * out.leakage;
  }
  out.energy_used = pulse_energy(out.pulse);
  out.residuals.energy = (out.energy_used - prob.budget.energy()) / prob.budget.energy();
  out.residuals.endpoint = out.pulse.final_phase() - kHalfPi;
  return out;
}

OptimizationResult run_start(const OptimizationProblem& prob, const Evaluator& ev, const Pulse& start) {
  const std::size_t n = prob.segments;
  const double h = prob.t_f / static_cast<double>(n);
  const double budget = prob.budget.energy();
  const bool at_most = prob.energy_mode == EnergyMode::at_most;

  std::vector<double> full(start.phases().begin(), start.phases().end());
  std::vector<double> y(full.begin() + 1, full.end() - 1);

  double lambda = 0.0;
  double mu = 10.0;

  // Augmented Lagrangian on c = (energy - E) / E; PHR form for the inequality reading.
  const auto lagrangian = [&](std::span<const double> x, std::span<double> g) {
    std::vector<double> phi(n + 1);
    phi[0] = 0.0;
    phi[n] = kHalfPi;
    std::copy(x.begin(), x.end(), phi.begin() + 1);
    std::vector<double> gfull(n + 1);
    const double j = ev.raw(phi, gfull) * ev.scale;
    const double c = (energy_of(phi, h) - budget) / budget;
    double mult;
    double value;
    if (at_most) {
      const double t = std::max(0.0, lambda + mu * c);
      mult = t;
      value = j + (t * t - lambda * lambda) / (2.0 * mu);
    } else {
      mult = lambda + mu * c;
      value = j + lambda * c + 0.5 * mu * c * c;
    }
    const double dc = 2.0 / (h * budget);
    for (std::size_t k = 1; k < n; ++k) {
      g[k - 1] = gfull[k] * ev.scale + mult * dc * (2.0 * phi[k] - phi[k - 1] - phi[k + 1]);
    }
    return value;
  };

  const auto violation = [&](std::span<const double> x) {
    std::vector<double> phi(n + 1);
    phi[n] = kHalfPi;
    std::copy(x.begin(), x.end(), phi.begin() + 1);
    const double c = (energy_of(phi, h) - budget) / budget;
    return std::make_pair(c, at_most ? std::abs(std::max(c, -lambda / mu)) : std::abs(c));
  };

  LbfgsOptions lo;
  lo.max_iterations = prob.options.max_iterations;
  lo.grad_tol = prob.options.grad_tol;

  std::vector<double> history;
  std::vector<std::size_t> restarts;
  int iterations = 0;
  bool converged = false;
  std::string message = "multiplier limit";
  double prev = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < prob.options.max_outer; ++outer) {
    const double metric = h * budget / (2.0 * (1.0 + mu + std::abs(lambda)));
    const Preconditioner precond = [metric](std::span<double> v) {
      laplacian_solve(v);
      for (double& e : v) e *= metric;
    };
    auto res = minimize_lbfgs(lagrangian, y, lo, precond);
    restarts.push_back(history.size());
    history.insert(history.end(), res.history.begin(), res.history.end());
    iterations += res.iterations;
    y = std::move(res.x);

    const auto [c, viol] = violation(y);
    if (viol <= prob.options.energy_tol && res.converged) {
      converged = true;
      message = "converged (" + res.reason + ")";
      break;
    }
    if (at_most) {
      lambda = std::max(0.0, lambda + mu * c);
    } else {
      lambda += mu * c;
    }
    if (viol > 0.25 * prev) mu = std::min(mu * 10.0, 1e12);
    prev = viol;
    if (!res.converged) message = "inner solver: " + res.reason;
  }

  std::copy(y.begin(), y.end(), full.begin() + 1);
  full.front() = 0.0;
  full.back() = kHalfPi;
  Pulse pulse = project_to_budget(Pulse(std::move(full), prob.t_f), prob.budget, prob.energy_mode);
  auto out = finish(prob, ev.model, ev.leakage, std::move(pulse));
  out.iterations = iterations;
  out.converged = converged;
  out.message = message;
  out.history = std::move(history);
  out.history_restarts = std::move(restarts);
  return out;
}

OptimizationResult solve(const OptimizationProblem& prob, bool leakage) {
  prob.validate();
  const std::size_t n = prob.segments;
  const InfidelityModel model(prob.bath, n, prob.t_f);

  if (at_minimum_time(prob)) {
    auto out = finish(prob, model, leakage, ramp_pulse(n, prob.t_f));
    out.converged = true;
    out.message = "t_f = t_min: the ramp is the only feasible pulse";
    return out;
  }

  std::vector<Pulse> starts;
  for (StartKind k : prob.starts.kinds) starts.push_back(start_pulse(prob, k));
  for (const Pulse& w : prob.starts.warm_starts) {
    auto resampled = stretch_pulse(w, prob.t_f, n);
    std::vector<double> phi(resampled.phases().begin(), resampled.phases().end());
    phi.front() = 0.0;
    phi.back() = kHalfPi;
    starts.push_back(project_to_budget(Pulse(std::move(phi), prob.t_f), prob.budget, prob.energy_mode));
  }
  if (starts.empty()) throw std::invalid_argument("at least one start is required");

  Evaluator ev{prob, model, leakage, 1.0};
  {
    const Pulse ref = extend_with_hold(fastest_pulse(prob.budget, n), prob.t_f, n);
    std::vector<double> g(n + 1);
    const double j = ev.raw(ref.phases(), g);
    ev.scale = j > 0.0 ? 1.0 / j : 1.0;
  }

  std::vector<std::optional<OptimizationResult>> results(starts.size());
  const std::size_t workers = prob.options.workers == 0 ? worker_count() : prob.options.workers;
  parallel_for(starts.size(), [&](std::size_t i) { results[i] = run_start(prob, ev, starts[i]); }, workers);

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i]->breakdown.total() < results[best]->breakdown.total()) best = i;
  }
  OptimizationResult out = std::move(*results[best]);
  out.best_start = best;
  return out;
}

}  // namespace

void OptimizationProblem::validate() const {
  bath.validate();
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw std::invalid_argument("t_f must be positive");
  if (t_f < budget.t_min() * (1.0 - kFeasibilitySlack)) {
    throw std::invalid_argument("infeasible: t_f = " + std::to_string(t_f) + " is shorter than t_min = " +
                                std::to_string(budget.t_min()) + " for energy " + std::to_string(budget.energy()));
  }
  if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw std::invalid_argument("omega0 must be >= 0");
  if (!(leak_weight >= 0.0) || !std::isfinite(leak_weight)) throw std::invalid_argument("leak_weight must be >= 0");
  if (segments < 4) throw std::invalid_argument("grid size must be at least 4 segments");
  if (options.max_iterations < 1 || options.max_outer < 1) throw std::invalid_argument("iteration limits must be >= 1");
  if (!(options.grad_tol > 0.0) || !(options.energy_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
}

Pulse project_to_budget(const Pulse& p, const EnergyBudget& budget, EnergyMode mode) {
  const std::size_t n = p.segments();
  const double h = p.dt();
  const double e_ramp = kHalfPi * kHalfPi / p.t_f();
  const double room = budget.energy() - e_ramp;
  if (room < -kFeasibilitySlack * budget.energy()) {
    throw std::invalid_argument("infeasible: the energy budget cannot reach pi/2 within t_f");
  }
  const auto ramp = ramp_samples(n);
  std::vector<double> d(n + 1);
  for (std::size_t k = 0; k < n; ++k) d[k] = p.phase(k) - ramp[k];
  d[0] = 0.0;
  d[n] = 0.0;
  double dev = energy_of(d, h);
  if (mode == EnergyMode::at_most && e_ramp + dev <= budget.energy()) {
    std::vector<double> phi(ramp);
    for (std::size_t k = 0; k <= n; ++k) phi[k] += d[k];
    return Pulse(std::move(phi), p.t_f());
  }
  if (room <= 0.0) return Pulse(ramp, p.t_f());
  if (dev == 0.0) {
    for (std::size_t k = 1; k < n; ++k) d[k] = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    dev = energy_of(d, h);
  }
  const double s = std::sqrt(room / dev);
  std::vector<double> phi(ramp);
  for (std::size_t k = 0; k <= n; ++k) phi[k] += s * d[k];
  phi[n] = kHalfPi;
  return Pulse(std::move(phi), p.t_f());
}

Pulse start_pulse(const OptimizationProblem& prob, StartKind kind) {
  const std::size_t n = prob.segments;
  const double t_f = prob.t_f;
  switch (kind) {
    case StartKind::ramp:
      return project_to_budget(ramp_pulse(n, t_f), prob.budget, prob.energy_mode);
    case StartKind::markovian: {
      const Pulse m = optimal_markovian_pulse(prob.budget, n);
      const Pulse fitted = m.t_f() <= t_f ? extend_with_hold(m, t_f, n) : stretch_pulse(m, t_f, n);
      std::vector<double> phi(fitted.phases().begin(), fitted.phases().end());
      phi.back() = kHalfPi;
      return project_to_budget(Pulse(std::move(phi), t_f), prob.budget, prob.energy_mode);
    }
    case StartKind::overshoot: {
      std::vector<double> phi(n + 1);
      const double peak = kHalfPi + kOvershootHeight;
      for (std::size_t k = 0; k <= n; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(n);
        phi[k] = u <= kOvershootPeak ? peak * u / kOvershootPeak
                                     : peak - kOvershootHeight * (u - kOvershootPeak) / (1.0 - kOvershootPeak);
      }
      phi.back() = kHalfPi;
      return project_to_budget(Pulse(std::move(phi), t_f), prob.budget, prob.energy_mode);
    }
  }
  throw std::invalid_argument("unknown start kind");
}

OptimizationResult optimize_rwa(const OptimizationProblem& prob) { return solve(prob, false); }

OptimizationResult optimize_with_leakage(const OptimizationProblem& prob) {
  if (!(prob.omega0 > 0.0)) throw std::invalid_argument("optimize_with_leakage requires omega0 > 0");
  return solve(prob, true);
}

OptimizationResult optimize(const OptimizationProblem& prob) {
  return prob.omega0 > 0.0 ? optimize_with_leakage(prob) : optimize_rwa(prob);
}

}  // namespace xferopt
