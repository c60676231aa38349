#include "xferopt/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "xferopt/csv.hpp"
#include "xferopt/parallel.hpp"

namespace xferopt {

namespace {

std::string compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SweepRecord run_point(const BathModel& bath, const EnergyBudget& budget, double t_f, const SweepOptions& opts,
                      const std::optional<Pulse>& previous) {
  const double t_min = budget.t_min();
  SweepRecord rec;
  rec.tf_over_tmin = t_f / t_min;
  rec.tc_over_tmin = bath.t_c / t_min;
  try {
    OptimizationProblem prob;
    prob.bath = bath;
    prob.budget = budget;
    prob.t_f = t_f;
    prob.segments = opts.segments;
    prob.energy_mode = opts.energy_mode;
    prob.starts.kinds = opts.kinds;
    prob.options = opts.optimizer;
    if (previous && previous->t_f() < t_f) {
      prob.starts.warm_starts.push_back(stretch_pulse(*previous, t_f, opts.segments));
      prob.starts.warm_starts.push_back(extend_with_hold(*previous, t_f, opts.segments));
    }
    auto res = optimize_rwa(prob);
    rec.infidelity = res.breakdown.total();
    rec.energy = res.energy_used;
    rec.max_phi = res.pulse.max_phase();
    rec.converged = res.converged;
    rec.message = res.message;
    rec.pulse = std::move(res.pulse);
    if (!opts.pulse_dir.empty()) {
      const auto name = sweep_pulse_name(rec.tc_over_tmin, rec.tf_over_tmin);
      const auto path = (std::filesystem::path(opts.pulse_dir) / name).string();
      write_pulse_csv(path, *rec.pulse);
      rec.pulse_file = name;
    }
  } catch (const std::exception& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.infidelity = nan;
    rec.energy = nan;
    rec.max_phi = nan;
    rec.converged = false;
    rec.message = e.what();
  }
  return rec;
}

}  // namespace

std::string sweep_pulse_name(double tc_over_tmin, double tf_over_tmin) {
  return "pulse_tc" + compact(tc_over_tmin) + "_tf" + compact(tf_over_tmin) + ".csv";
}

std::vector<SweepRecord> sweep_final_time(const BathModel& bath, const EnergyBudget& budget,
                                          std::span<const double> t_f_list, const SweepOptions& opts) {
  bath.validate();
  std::vector<double> unique(t_f_list.begin(), t_f_list.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (!opts.pulse_dir.empty()) std::filesystem::create_directories(opts.pulse_dir);

  std::vector<SweepRecord> solved(unique.size());
  if (opts.warm_start) {
    std::optional<Pulse> previous;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      solved[i] = run_point(bath, budget, unique[i], opts, previous);
      if (solved[i].pulse) previous = solved[i].pulse;
    }
  } else {
    // points in parallel, each optimization single-threaded
    SweepOptions inner = opts;
    inner.optimizer.workers = 1;
    parallel_for(unique.size(), [&](std::size_t i) { solved[i] = run_point(bath, budget, unique[i], inner, {}); },
                 opts.optimizer.workers == 0 ? worker_count() : opts.optimizer.workers);
  }

  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < unique.size(); ++i) index[unique[i]] = i;
  std::vector<SweepRecord> out;
  out.reserve(t_f_list.size());
  for (double t : t_f_list) out.push_back(solved[index.at(t)]);
  return out;
}

void write_sweep_csv(const std::string& path, std::span<const SweepRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "tf_over_tmin,tc_over_tmin,infidelity,energy,max_phi,converged,pulse_file\n";
  for (const auto& r : records) {
    out << format_double(r.tf_over_tmin) << ',' << format_double(r.tc_over_tmin) << ','
        << format_double(r.infidelity) << ',' << format_double(r.energy) << ',' << format_double(r.max_phi) << ','
        << (r.converged ? 1 : 0) << ',' << r.pulse_file << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<Plateau> find_plateaus(std::span<const double> x, std::span<const double> y, double max_slope,
                                   std::size_t min_points) {
  if (x.size() != y.size()) throw std::invalid_argument("find_plateaus: size mismatch");
  const std::size_t n = x.size();
  std::vector<Plateau> out;
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) throw std::invalid_argument("find_plateaus: x and y must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) throw std::invalid_argument("find_plateaus: x must be increasing");
  }
  std::vector<bool> flat(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    const double slope = std::log(y[b] / y[a]) / std::log(x[b] / x[a]);
    flat[i] = std::abs(slope) <= max_slope;
  }
  std::size_t i = 0;
  while (i < n) {
    if (!flat[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && flat[j]) ++j;
    if (j - i >= min_points) {
      std::vector<double> v(y.begin() + static_cast<std::ptrdiff_t>(i), y.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size();
      const double median = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
      out.push_back({i, j, median});
    }
    i = j;
  }
  return out;
}

}  // namespace xferopt
