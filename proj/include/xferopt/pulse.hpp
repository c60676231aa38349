#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xferopt {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr std::size_t kDefaultSegments = 512;

/// Control energy budget E = \int V(t)^2 dt and the shortest transfer time it allows.
class EnergyBudget {
 public:
  explicit EnergyBudget(double energy);

  double energy() const { return energy_; }
  /// pi^2 / (4E): the ramp to pi/2 that spends exactly E.
  double t_min() const { return std::numbers::pi * std::numbers::pi / (4.0 * energy_); }

  /// Budget whose minimum transfer time is `t_min`.
  static EnergyBudget from_t_min(double t_min);

 private:
  double energy_;
};

/// Accumulated coupling phase phi(t) sampled on a uniform grid of N+1 points over [0, t_f].
///
/// phi is piecewise linear between samples, so the coupling amplitude V = dphi/dt is piecewise
/// constant. Phases are not wrapped: overshoot past pi/2 is representable.
class Pulse {
 public:
  Pulse(std::vector<double> phases, double t_f);

  double t_f() const { return t_f_; }
  std::size_t segments() const { return phases_.size() - 1; }
  std::size_t samples() const { return phases_.size(); }
  double dt() const { return t_f_ / static_cast<double>(segments()); }
  double time(std::size_t k) const { return t_f_ * static_cast<double>(k) / static_cast<double>(segments()); }

  std::span<const double> phases() const { return phases_; }
  double phase(std::size_t k) const { return phases_[k]; }
  double final_phase() const { return phases_.back(); }
  double max_phase() const;

  /// Phase at arbitrary t in [0, t_f] by linear interpolation.
  double phase_at(double t) const;

  /// Segment amplitudes V_k = (phi_{k+1} - phi_k) / dt, k = 0..N-1.
  std::vector<double> amplitudes() const;

 private:
  std::vector<double> phases_;
  double t_f_;
};

Pulse make_pulse(std::vector<double> phases, double t_f);

/// Linear ramp phi = (2E/pi) t on [0, t_min]; `segments` >= 2.
Pulse fastest_pulse(const EnergyBudget& budget, std::size_t segments = kDefaultSegments);

/// sum_k (dphi_k)^2 / dt; exact for the piecewise-linear phase.
double pulse_energy(const Pulse& p);

/// V(t) of the segment containing t. Right-continuous; at t_f returns the last segment's value.
double control_amplitude(const Pulse& p, double t);

/// phi'(t) = phi(a t): same samples on the grid [0, t_f / a].
Pulse scale_pulse(const Pulse& p, double a);

/// Samples of `p` on a uniform grid with `segments` intervals over [0, t_f]; the pulse is
/// time-stretched by t_f / p.t_f().
Pulse stretch_pulse(const Pulse& p, double t_f, std::size_t segments);

/// `p` followed by a hold at its final phase, resampled onto `segments` intervals over [0, t_f].
/// Requires t_f >= p.t_f().
Pulse extend_with_hold(const Pulse& p, double t_f, std::size_t segments);

/// Error raised for malformed pulse CSV input. `line()` is 1-based.
class PulseFormatError : public std::runtime_error {
 public:
  PulseFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// CSV with header `t,phi,V`, one row per grid point, 17 significant digits.
void write_pulse_csv(std::ostream& out, const Pulse& p);
void write_pulse_csv(const std::string& path, const Pulse& p);
Pulse read_pulse_csv(std::istream& in);
Pulse read_pulse_csv(const std::string& path);

}  // namespace xferopt
