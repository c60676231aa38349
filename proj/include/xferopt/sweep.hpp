#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xferopt/optimizer.hpp"

namespace xferopt {

struct SweepOptions {
  std::size_t segments = kDefaultSegments;
  EnergyMode energy_mode = EnergyMode::equal;
  std::vector<StartKind> kinds{StartKind::ramp, StartKind::markovian, StartKind::overshoot};
  OptimizerOptions optimizer;
  /// Seed each point with the previous optimum, both time-dilated and extended by a hold.
  /// Points then run in order; without warm starts they run concurrently.
  bool warm_start = true;
  /// When non-empty, each optimum is written there as a pulse CSV.
  std::string pulse_dir;
};

struct SweepRecord {
  double tf_over_tmin = 0.0;
  double tc_over_tmin = 0.0;
  double infidelity = 0.0;
  double energy = 0.0;
  double max_phi = 0.0;
  bool converged = false;
  std::string pulse_file;
  std::string message;
  std::optional<Pulse> pulse;
};

/// Optimizes every t_f in `t_f_list` (absolute times, each >= t_min). Records come back in input
/// order; repeated t_f values share one optimization. A point that throws is recorded with
/// converged = false and NaN figures of merit instead of aborting the sweep.
std::vector<SweepRecord> sweep_final_time(const BathModel& bath, const EnergyBudget& budget,
                                          std::span<const double> t_f_list, const SweepOptions& opts = {});

/// `tf,tc` style file name used for sweep pulse files, e.g. pulse_tc10_tf2.5.csv.
std::string sweep_pulse_name(double tc_over_tmin, double tf_over_tmin);

/// Header `tf_over_tmin,tc_over_tmin,infidelity,energy,max_phi,converged,pulse_file`.
void write_sweep_csv(const std::string& path, std::span<const SweepRecord> records);

/// Run of consecutive points along a curve where |d ln y / d ln x| stays below a threshold.
struct Plateau {
  std::size_t begin = 0;  ///< first index
  std::size_t end = 0;    ///< one past the last index
  double level = 0.0;     ///< median of y over the run
};

/// Plateaus of y(x) with at least `min_points` points; the local slope at i is the centered
/// log-log difference (one-sided at the ends). x must be increasing and y positive.
std::vector<Plateau> find_plateaus(std::span<const double> x, std::span<const double> y, double max_slope = 0.1,
                                   std::size_t min_points = 3);

}  // namespace xferopt
