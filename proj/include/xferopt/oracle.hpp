#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xferopt/bath.hpp"
#include "xferopt/pulse.hpp"

namespace xferopt {

struct OracleConfig {
  std::size_t n_traj = 10000;
  std::uint64_t seed = 20240229;
  /// Integration step; 0 picks the largest allowed one.
  double dt = 0.0;
  /// Drop the counter-rotating coupling, which leaves the even sector with pure dephasing.
  bool rwa = true;
  /// Track the |gg>, |ee> amplitudes. When false the even sector is taken as ideal.
  bool include_even = true;
  std::size_t workers = 0;  ///< 0: worker_count()

  void validate() const;
};

/// dt <= min(t_c / 10, t_f / N, 0.01 / omega0 without the rotating-wave approximation).
double max_oracle_step(const Pulse& p, const BathModel& b, double omega0, const OracleConfig& cfg);

struct FidelityEstimate {
  double mean = 0.0;        ///< average transfer fidelity
  double std_error = 0.0;   ///< standard error of the mean over trajectories
  std::size_t n_traj = 0;
  double infidelity = 0.0;  ///< 1 - mean, accumulated directly to keep its digits
  double max_norm_error = 0.0;
  double dt = 0.0;          ///< step actually used
};

/// Average fidelity over the six Pauli eigenstates of qubit 1 given the rotating-frame amplitudes
/// a = <gg|U|gg> and c = i <ge|U|eg>: (|a|^2 + |c|^2 + |a + c|^2) / 6.
double six_state_fidelity(std::complex<double> a, std::complex<double> c);

/// Monte-Carlo transfer fidelity under classical Gaussian dephasing b(t) sigma_z on qubit 1.
///
/// Each trajectory propagates the odd pair (ge, eg) under V sigma_x + b sigma_z and, when
/// include_even is set, the even pair under (omega0 + b) sigma_z + V sigma_x (non-RWA) or pure
/// dephasing (RWA). Noise is held constant over each step: Ornstein-Uhlenbeck samples for t_c > 0,
/// Gaussian phase increments of variance 2 C gamma dt in the Markovian case. Results are bitwise
/// reproducible for a given (seed, n_traj) whatever the worker count.
FidelityEstimate simulate_transfer(const Pulse& p, const BathModel& b, double omega0, const OracleConfig& cfg);

struct ShapeRatioReport {
  std::vector<double> predicted;
  std::vector<FidelityEstimate> estimates;
  std::vector<double> ratios;  ///< (1 - mean) / predicted
  double mean_ratio = 0.0;
  double spread = 0.0;         ///< (max - min) / mean of the ratios
};

/// Simulates each pulse and compares with the second-order prediction (bath infidelity, plus the
/// exact noiseless leakage loss when the rotating-wave approximation is off). Every prediction
/// must be <= 0.05.
ShapeRatioReport shape_ratio_check(std::span<const Pulse> pulses, const BathModel& b, double omega0,
                                   const OracleConfig& cfg);

}  // namespace xferopt
