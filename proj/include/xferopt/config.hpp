#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xferopt/bath.hpp"
#include "xferopt/optimizer.hpp"
#include "xferopt/oracle.hpp"
#include "xferopt/pulse.hpp"

namespace xferopt {

/// Settings shared by the command-line tools.
///
/// JSON keys: bath.gamma, bath.t_c, bath.corr_norm, control.energy, control.t_f, control.grid_n,
/// system.omega0, optimizer.{leak_weight, starts, energy_mode, max_iterations, max_outer, grad_tol},
/// oracle.{n_traj, seed, dt, rwa, include_even}, out.dir. Keys may be written flat ("bath.gamma")
/// or nested ({"bath": {"gamma": ...}}).
struct RunConfig {
  BathModel bath;
  double energy = kHalfPi * kHalfPi;
  std::optional<double> t_f;  ///< defaults to t_min
  std::size_t grid_n = kDefaultSegments;
  double omega0 = 0.0;

  double leak_weight = 0.5;
  std::vector<StartKind> starts{StartKind::ramp, StartKind::markovian, StartKind::overshoot};
  EnergyMode energy_mode = EnergyMode::equal;
  OptimizerOptions optimizer;

  OracleConfig oracle;
  std::string out_dir = ".";

  EnergyBudget budget() const { return EnergyBudget(energy); }
  double final_time() const { return t_f.value_or(budget().t_min()); }

  /// Rejects inconsistent settings (t_f < t_min, negative rates, ...) with a message naming the key.
  void validate() const;
  OptimizationProblem problem() const;
};

/// Overrides fields from a JSON document. Unknown keys are an error.
void apply_config_json(RunConfig& cfg, std::string_view json_text);
RunConfig load_run_config(const std::string& path);

/// Comma-separated list of doubles, e.g. "1,2,3.5".
std::vector<double> parse_double_list(std::string_view text);
std::vector<StartKind> parse_start_list(std::string_view text);

/// Creates `dir` if needed and checks that a file can be written inside it.
void ensure_writable_dir(const std::string& dir);

}  // namespace xferopt
