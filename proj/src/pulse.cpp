#include "xferopt/pulse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "xferopt/csv.hpp"

namespace xferopt {

EnergyBudget::EnergyBudget(double energy) : energy_(energy) {
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    throw std::invalid_argument("energy budget must be positive and finite");
  }
}

EnergyBudget EnergyBudget::from_t_min(double t_min) {
  if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
  return EnergyBudget(std::numbers::pi * std::numbers::pi / (4.0 * t_min));
}

Pulse::Pulse(std::vector<double> phases, double t_f) : phases_(std::move(phases)), t_f_(t_f) {
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw std::invalid_argument("pulse t_f must be positive");
  if (phases_.size() < 3) throw std::invalid_argument("pulse needs at least 3 phase samples");
  if (phases_.front() != 0.0) throw std::invalid_argument("pulse phase must start at exactly 0");
  for (double v : phases_) {
    if (!std::isfinite(v)) throw std::invalid_argument("pulse phases must be finite");
  }
}

double Pulse::max_phase() const { return *std::max_element(phases_.begin(), phases_.end()); }

double Pulse::phase_at(double t) const {
  if (t <= 0.0) return phases_.front();
  if (t >= t_f_) return phases_.back();
  const double u = t / dt();
  const auto k = std::min(static_cast<std::size_t>(u), segments() - 1);
  const double frac = u - static_cast<double>(k);
  return phases_[k] + frac * (phases_[k + 1] - phases_[k]);
}

std::vector<double> Pulse::amplitudes() const {
  std::vector<double> v(segments());
  const double h = dt();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (phases_[k + 1] - phases_[k]) / h;
  return v;
}

Pulse make_pulse(std::vector<double> phases, double t_f) { return Pulse(std::move(phases), t_f); }

Pulse fastest_pulse(const EnergyBudget& budget, std::size_t segments) {
  if (segments < 2) throw std::invalid_argument("fastest_pulse needs at least 2 segments");
  std::vector<double> phi(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    phi[k] = kHalfPi * static_cast<double>(k) / static_cast<double>(segments);
  }
  phi.back() = kHalfPi;
  return Pulse(std::move(phi), budget.t_min());
}

double pulse_energy(const Pulse& p) {
  const auto phi = p.phases();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < phi.size(); ++k) {
    const double d = phi[k + 1] - phi[k];
    sum += d * d;
  }
  return sum / p.dt();
}

double control_amplitude(const Pulse& p, double t) {
  if (!(t >= 0.0 && t <= p.t_f())) throw std::out_of_range("control_amplitude: t outside [0, t_f]");
  auto k = static_cast<std::size_t>(t / p.dt());
  k = std::min(k, p.segments() - 1);
  return (p.phase(k + 1) - p.phase(k)) / p.dt();
}

Pulse scale_pulse(const Pulse& p, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("scale factor must be positive");
  return Pulse(std::vector<double>(p.phases().begin(), p.phases().end()), p.t_f() / a);
}

Pulse stretch_pulse(const Pulse& p, double t_f, std::size_t segments) {
  if (segments < 2) throw std::invalid_argument("stretch_pulse needs at least 2 segments");
  std::vector<double> phi(segments + 1);
  const double ratio = p.t_f() / t_f;
  for (std::size_t k = 0; k <= segments; ++k) {
    const double t = t_f * static_cast<double>(k) / static_cast<double>(segments);
    phi[k] = p.phase_at(t * ratio);
  }
  phi.front() = 0.0;
  phi.back() = p.final_phase();
  return Pulse(std::move(phi), t_f);
}

Pulse extend_with_hold(const Pulse& p, double t_f, std::size_t segments) {
  if (t_f < p.t_f()) throw std::invalid_argument("extend_with_hold: t_f shorter than the pulse");
  if (segments < 2) throw std::invalid_argument("extend_with_hold needs at least 2 segments");
  std::vector<double> phi(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) {
    phi[k] = p.phase_at(t_f * static_cast<double>(k) / static_cast<double>(segments));
  }
  phi.front() = 0.0;
  phi.back() = p.final_phase();
  return Pulse(std::move(phi), t_f);
}

PulseFormatError::PulseFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("pulse CSV line " + std::to_string(line) + ": " + what), line_(line) {}

void write_pulse_csv(std::ostream& out, const Pulse& p) {
  out << "t,phi,V\n";
  const auto v = p.amplitudes();
  for (std::size_t k = 0; k < p.samples(); ++k) {
    const double vk = v[std::min(k, v.size() - 1)];
    out << format_double(p.time(k)) << ',' << format_double(p.phase(k)) << ',' << format_double(vk)
        << '\n';
  }
}

void write_pulse_csv(const std::string& path, const Pulse& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_pulse_csv(out, p);
}

Pulse read_pulse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw PulseFormatError(1, "empty input, expected header `t,phi,V`");
  ++line_no;
  if (trim(line) != "t,phi,V") throw PulseFormatError(line_no, "expected header `t,phi,V`");

  std::vector<double> times;
  std::vector<double> phases;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_csv_row(row);
    if (fields.size() != 3) {
      throw PulseFormatError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    double t = 0.0;
    double phi = 0.0;
    double v = 0.0;
    if (!parse_double(fields[0], t) || !parse_double(fields[1], phi) || !parse_double(fields[2], v)) {
      throw PulseFormatError(line_no, "non-numeric field");
    }
    if (times.empty()) {
      if (t != 0.0) throw PulseFormatError(line_no, "first time sample must be 0");
      if (phi != 0.0) throw PulseFormatError(line_no, "first phase sample must be 0");
    } else if (!(t > times.back())) {
      throw PulseFormatError(line_no, "time column is not strictly increasing");
    }
    times.push_back(t);
    phases.push_back(phi);
  }
  if (times.size() < 3) {
    throw PulseFormatError(line_no, "need at least 3 rows, got " + std::to_string(times.size()));
  }
  const double t_f = times.back();
  const double h = t_f / static_cast<double>(times.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - h * static_cast<double>(k)) > 1e-9 * t_f) {
      // header occupies line 1, so sample k sits on line k + 2 when there are no blank lines
      throw PulseFormatError(k + 2, "time grid is not uniform");
    }
  }
  return Pulse(std::move(phases), t_f);
}

Pulse read_pulse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pulse file " + path);
  return read_pulse_csv(in);
}

}  // namespace xferopt
