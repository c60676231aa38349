#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "xferopt/bath.hpp"
#include "xferopt/fidelity.hpp"
#include "xferopt/pulse.hpp"

namespace xferopt {

/// How the energy budget constrains the pulse: exactly spent, or an upper bound.
enum class EnergyMode { equal, at_most };

EnergyMode parse_energy_mode(const std::string& s);
std::string to_string(EnergyMode m);

enum class StartKind {
  ramp,       ///< linear ramp over [0, t_f], bent onto the energy sphere
  markovian,  ///< white-noise optimal profile, held at pi/2 if it ends early
  overshoot,  ///< rises to pi/2 + 0.3 at 0.4 t_f, then relaxes linearly
};

StartKind parse_start_kind(const std::string& s);
std::string to_string(StartKind k);

struct MultistartSpec {
  std::vector<StartKind> kinds{StartKind::ramp, StartKind::markovian, StartKind::overshoot};
  /// Extra initial pulses (any grid; resampled onto the problem grid over t_f).
  std::vector<Pulse> warm_starts;
};

struct OptimizerOptions {
  int max_iterations = 2000;  ///< per inner quasi-Newton solve
  int max_outer = 40;         ///< multiplier updates
  double grad_tol = 1e-8;
  double energy_tol = 1e-9;   ///< |energy - E| / E accepted before the final projection
  std::size_t workers = 0;    ///< 0: worker_count()
};

struct OptimizationProblem {
  BathModel bath;
  EnergyBudget budget{std::numbers::pi * std::numbers::pi / 4.0};
  double t_f = 1.0;
  /// Qubit splitting parameter; 0 disables the leakage term.
  double omega0 = 0.0;
  double leak_weight = 0.5;
  std::size_t segments = kDefaultSegments;
  EnergyMode energy_mode = EnergyMode::equal;
  MultistartSpec starts;
  OptimizerOptions options;

  /// Throws std::invalid_argument, naming the offending field.
  void validate() const;
};

struct ConstraintResiduals {
  double energy = 0.0;    ///< (energy_used - E) / E
  double endpoint = 0.0;  ///< phi(t_f) - pi/2
};

struct OptimizationResult {
  Pulse pulse;
  InfidelityBreakdown breakdown;
  double leakage = 0.0;  ///< |amp_ee(t_f)|^2, 0 when omega0 = 0
  double energy_used = 0.0;
  ConstraintResiduals residuals;
  int iterations = 0;
  bool converged = false;
  std::size_t best_start = 0;
  std::string message;
  /// Augmented objective after every accepted step of the winning start. The multipliers change
  /// at the indices listed in `history_restarts`; within each run the values never increase.
  std::vector<double> history;
  std::vector<std::size_t> history_restarts;
};

/// Best result over all starts, chosen by total infidelity with ties going to the lower index.
/// t_f = t_min returns the ramp (the only feasible pulse); t_f < t_min throws std::invalid_argument.
OptimizationResult optimize_rwa(const OptimizationProblem& prob);

/// Same, minimizing bath infidelity + leak_weight |amp_ee|^2. Requires omega0 > 0.
OptimizationResult optimize_with_leakage(const OptimizationProblem& prob);

/// Dispatches on omega0.
OptimizationResult optimize(const OptimizationProblem& prob);

/// Initial pulse of the given kind on the problem grid, projected onto the constraint set.
Pulse start_pulse(const OptimizationProblem& prob, StartKind kind);

/// Moves phi along phi - ramp so that the energy equals E (or does not exceed it in at_most mode).
/// The ramp and the deviation are orthogonal in the discrete energy inner product, so the scale
/// factor is closed form.
Pulse project_to_budget(const Pulse& p, const EnergyBudget& budget, EnergyMode mode = EnergyMode::equal);

}  // namespace xferopt
