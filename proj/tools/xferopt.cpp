// xferopt: optimal control of a noisy two-qubit state transfer.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <string>
#include <vector>

#include "xferopt/config.hpp"
#include "xferopt/csv.hpp"
#include "xferopt/fidelity.hpp"
#include "xferopt/leakage.hpp"
#include "xferopt/markovian.hpp"
#include "xferopt/optimizer.hpp"
#include "xferopt/oracle.hpp"
#include "xferopt/sweep.hpp"

using namespace xferopt;

namespace {

using Setter = std::function<void(RunConfig&)>;

struct Common {
  std::string config_path;
  std::vector<Setter> setters;

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    for (const auto& s : setters) s(cfg);
    cfg.validate();
    return cfg;
  }
};

template <class T, class F>
void add_override(CLI::App* app, Common& common, const std::string& name, const std::string& help, F assign) {
  app->add_option_function<T>(
      name, [&common, assign](const T& v) { common.setters.push_back([v, assign](RunConfig& c) { assign(c, v); }); },
      help);
}

void add_physics(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON configuration file; flags override its values");
  add_override<double>(app, c, "--gamma", "system-bath coupling rate", [](RunConfig& r, double v) { r.bath.gamma = v; });
  add_override<double>(app, c, "--t-c", "bath correlation time (0: Markovian)", [](RunConfig& r, double v) { r.bath.t_c = v; });
  add_override<double>(app, c, "--corr-norm", "correlation normalization C", [](RunConfig& r, double v) { r.bath.corr_norm = v; });
  add_override<double>(app, c, "--energy", "control energy budget E", [](RunConfig& r, double v) { r.energy = v; });
  add_override<std::size_t>(app, c, "--grid-n", "grid segments", [](RunConfig& r, std::size_t v) { r.grid_n = v; });
  add_override<double>(app, c, "--omega0", "qubit splitting omega0 (0: rotating-wave only)",
                       [](RunConfig& r, double v) { r.omega0 = v; });
}

void add_t_f(CLI::App* app, Common& c) {
  add_override<double>(app, c, "--t-f", "final time (default t_min)", [](RunConfig& r, double v) { r.t_f = v; });
}

void add_optimizer(CLI::App* app, Common& c) {
  add_override<double>(app, c, "--leak-weight", "weight of |amp_ee|^2 in the objective",
                       [](RunConfig& r, double v) { r.leak_weight = v; });
  add_override<std::string>(app, c, "--starts", "comma list of ramp, markovian, overshoot",
                            [](RunConfig& r, const std::string& v) { r.starts = parse_start_list(v); });
  add_override<std::string>(app, c, "--energy-mode", "equal or at_most",
                            [](RunConfig& r, const std::string& v) { r.energy_mode = parse_energy_mode(v); });
  add_override<int>(app, c, "--max-iterations", "inner iterations per multiplier update",
                    [](RunConfig& r, int v) { r.optimizer.max_iterations = v; });
}

void add_out_dir(CLI::App* app, Common& c) {
  add_override<std::string>(app, c, "--out-dir", "output directory", [](RunConfig& r, const std::string& v) { r.out_dir = v; });
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void kv(const std::string& key, const std::string& value) { std::cout << key << ": " << value << '\n'; }

Pulse load_or_fastest(const std::string& path, const RunConfig& cfg) {
  if (!path.empty()) return read_pulse_csv(path);
  const Pulse fast = fastest_pulse(cfg.budget(), cfg.grid_n);
  return cfg.t_f ? extend_with_hold(fast, *cfg.t_f, cfg.grid_n) : fast;
}

// Resolves a bare file name against the output directory and creates the parent directory.
std::string out_path(const RunConfig& cfg, const std::string& file) {
  if (file.empty()) return {};
  const std::filesystem::path p(file);
  const auto full = p.is_absolute() || p.has_parent_path() ? p : std::filesystem::path(cfg.out_dir) / p;
  if (full.has_parent_path()) ensure_writable_dir(full.parent_path().string());
  return full.string();
}

int cmd_evaluate(const Common& common, const std::string& pulse_path, bool as_json) {
  const RunConfig cfg = common.resolve();
  const Pulse p = read_pulse_csv(pulse_path);
  const double t_min = cfg.budget().t_min();
  const double energy = pulse_energy(p);

  nlohmann::ordered_json out;
  out["t_f"] = p.t_f();
  out["t_min"] = t_min;
  out["tf_over_tmin"] = p.t_f() / t_min;
  out["energy"] = energy;
  out["energy_budget"] = cfg.energy;
  out["final_phase"] = p.final_phase();
  out["max_phi"] = p.max_phase();
  out["gamma"] = cfg.bath.gamma;
  out["t_c"] = cfg.bath.t_c;
  out["tc_over_tmin"] = cfg.bath.t_c / t_min;

  const double production = bath_infidelity(p, cfg.bath);
  out["infidelity"] = production;
  out["infidelity_time"] = cfg.bath.markovian() ? infidelity_markovian(p, cfg.bath) : infidelity_time(p, cfg.bath);
  try {
    out["infidelity_freq"] = infidelity_freq(p, cfg.bath);
    const double f = out["infidelity_freq"].get<double>();
    const double t = out["infidelity_time"].get<double>();
    out["freq_time_rel_diff"] = t == 0.0 ? std::abs(f) : std::abs(f - t) / std::abs(t);
  } catch (const std::exception& e) {
    out["infidelity_freq"] = nullptr;
    out["freq_time_note"] = e.what();
  }
  if (cfg.bath.gamma > 0.0) out["coefficient"] = production * energy / cfg.bath.gamma;
  if (cfg.omega0 > 0.0) out["leakage"] = propagate_even(p, cfg.omega0).leakage();

  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& [k, v] : out.items()) {
      if (v.is_number()) {
        kv(k, num(v.get<double>()));
      } else if (v.is_null()) {
        kv(k, "n/a");
      } else {
        kv(k, v.get<std::string>());
      }
    }
  }
  return 0;
}

int cmd_optimize(const Common& common, const std::string& out_file) {
  const RunConfig cfg = common.resolve();
  ensure_writable_dir(cfg.out_dir);
  const auto prob = cfg.problem();
  const auto res = optimize(prob);
  const double t_min = cfg.budget().t_min();
  const double fastest = bath_infidelity(extend_with_hold(fastest_pulse(prob.budget, prob.segments), prob.t_f, prob.segments), prob.bath);

  kv("t_f", num(prob.t_f));
  kv("tf_over_tmin", num(prob.t_f / t_min));
  kv("tc_over_tmin", num(prob.bath.t_c / t_min));
  kv("bath_infidelity", num(res.breakdown.bath_infidelity));
  if (prob.omega0 > 0.0) {
    kv("leakage", num(res.leakage));
    kv("leakage_penalty", num(res.breakdown.leakage_penalty));
  }
  kv("total", num(res.breakdown.total()));
  if (prob.bath.gamma > 0.0) {
    kv("coefficient", num(res.breakdown.bath_infidelity * cfg.energy / prob.bath.gamma));
    kv("ratio_to_fastest", num(res.breakdown.bath_infidelity / fastest));
  }
  kv("max_phi", num(res.pulse.max_phase()));
  kv("energy_used", num(res.energy_used));
  kv("energy_residual", num(res.residuals.energy));
  kv("iterations", std::to_string(res.iterations));
  kv("best_start", std::to_string(res.best_start));
  kv("converged", res.converged ? "true" : "false");
  kv("message", res.message);
  const auto path = out_path(cfg, out_file.empty() ? "pulse.csv" : out_file);
  write_pulse_csv(path, res.pulse);
  kv("pulse_file", path);
  return res.converged ? 0 : 1;
}

int cmd_sweep(const Common& common, const std::string& tf_list, const std::string& tc_list, bool no_warm) {
  const RunConfig cfg = common.resolve();
  ensure_writable_dir(cfg.out_dir);
  const auto budget = cfg.budget();
  const double t_min = budget.t_min();
  const auto tf_units = parse_double_list(tf_list);
  std::vector<double> tc_units = tc_list.empty() ? std::vector<double>{cfg.bath.t_c / t_min} : parse_double_list(tc_list);
  for (double u : tf_units) {
    if (u < 1.0 - 1e-12) throw std::invalid_argument("--t-f-list values are in units of t_min and must be >= 1");
  }
  std::vector<double> t_f;
  for (double u : tf_units) t_f.push_back(u * t_min);

  SweepOptions opts;
  opts.segments = cfg.grid_n;
  opts.energy_mode = cfg.energy_mode;
  opts.kinds = cfg.starts;
  opts.optimizer = cfg.optimizer;
  opts.warm_start = !no_warm;
  opts.pulse_dir = cfg.out_dir;

  std::vector<SweepRecord> all;
  bool ok = true;
  for (double tc : tc_units) {
    BathModel bath = cfg.bath;
    bath.t_c = tc * t_min;
    auto recs = sweep_final_time(bath, budget, t_f, opts);
    for (auto& r : recs) {
      ok = ok && r.converged;
      std::printf("tc/tmin=%-6s tf/tmin=%-6s infidelity=%-14s max_phi=%-10s converged=%d\n", num(r.tc_over_tmin).c_str(),
                  num(r.tf_over_tmin).c_str(), num(r.infidelity).c_str(), num(r.max_phi).c_str(), r.converged ? 1 : 0);
      all.push_back(std::move(r));
    }
  }
  const auto csv = (std::filesystem::path(cfg.out_dir) / "sweep.csv").string();
  write_sweep_csv(csv, all);
  kv("sweep_file", csv);
  return ok ? 0 : 1;
}

int cmd_markovian(const Common& common, double tol, const std::string& profile_out, const std::string& pulse_out) {
  const RunConfig cfg = common.resolve();
  const auto profile = solve_markovian_profile(tol);
  const double e2 = profile.energy * profile.energy;
  const double ramp = std::numbers::pi * std::numbers::pi / 8.0;
  kv("e_M", num(profile.energy));
  kv("e_M_squared", num(e2));
  kv("fastest_coefficient", num(ramp));
  kv("optimal_over_fastest", num(e2 / ramp));
  kv("profile_samples", std::to_string(profile.x.size()));
  kv("x_end", num(profile.x_end()));
  const auto budget = cfg.budget();
  kv("duration_over_tmin", num(profile.x_end() * profile.energy / budget.energy() / budget.t_min()));
  if (cfg.bath.gamma > 0.0) kv("optimal_infidelity", num(markovian_optimum_infidelity(profile, cfg.bath.gamma, cfg.energy)));
  if (!profile_out.empty()) {
    const auto path = out_path(cfg, profile_out);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "x,phi,dphi\n";
    for (std::size_t i = 0; i < profile.x.size(); ++i) {
      out << format_double(profile.x[i]) << ',' << format_double(profile.phi[i]) << ',' << format_double(profile.dphi[i])
          << '\n';
    }
    kv("profile_file", path);
  }
  if (!pulse_out.empty()) {
    const auto path = out_path(cfg, pulse_out);
    write_pulse_csv(path, optimal_markovian_pulse(profile, budget, cfg.grid_n));
    kv("pulse_file", path);
  }
  return 0;
}

int cmd_leakage(const Common& common, const std::string& pulse_path, const std::string& corrector_times) {
  const RunConfig cfg = common.resolve();
  if (!(cfg.omega0 > 0.0)) throw std::invalid_argument("leakage needs --omega0 > 0");
  const Pulse p = load_or_fastest(pulse_path, cfg);
  const auto state = propagate_even(p, cfg.omega0);
  const double t_min = cfg.budget().t_min();
  kv("omega0_tmin", num(cfg.omega0 * t_min));
  kv("t_f", num(p.t_f()));
  kv("leakage", num(state.leakage()));
  kv("leakage_first_order", num(std::norm(perturbative_leakage_amplitude(p, cfg.omega0))));
  kv("norm_error", num(std::abs(state.norm() - 1.0)));
  if (!corrector_times.empty()) {
    std::vector<double> times;
    for (double u : parse_double_list(corrector_times)) times.push_back(u * t_min);
    const auto fit = corrector_scaling(state, cfg.omega0, times, static_cast<double>(cfg.grid_n) / t_min);
    for (std::size_t i = 0; i < fit.times.size(); ++i) {
      std::printf("corrector T/tmin=%s energy=%s\n", num(fit.times[i] / t_min).c_str(), num(fit.energies[i]).c_str());
    }
    kv("corrector_slope", num(fit.slope));
    kv("corrector_kappa", num(fit.kappa));
    kv("corrector_fit_residual", num(fit.max_residual));
  }
  return 0;
}

int cmd_oracle(const Common& common, const std::string& pulse_path) {
  const RunConfig cfg = common.resolve();
  const Pulse p = load_or_fastest(pulse_path, cfg);
  const auto est = simulate_transfer(p, cfg.bath, cfg.omega0, cfg.oracle);
  double predicted = bath_infidelity(p, cfg.bath);
  if (!cfg.oracle.rwa && cfg.omega0 > 0.0) {
    const auto even = propagate_even(p, cfg.omega0);
    predicted += 1.0 - six_state_fidelity(even.amp_gg * std::polar(1.0, -cfg.omega0 * p.t_f()), Complex(1.0, 0.0));
  }
  kv("mean", num(est.mean));
  kv("stderr", num(est.std_error));
  kv("infidelity", num(est.infidelity));
  kv("predicted", num(predicted));
  kv("ratio", predicted > 0.0 ? num(est.infidelity / predicted) : "n/a");
  kv("n_traj", std::to_string(est.n_traj));
  kv("dt", num(est.dt));
  kv("max_norm_error", num(est.max_norm_error));
  return 0;
}

int cmd_pulse(const Common& common, const std::string& kind, const std::string& out_file) {
  const RunConfig cfg = common.resolve();
  Pulse p = kind == "fastest"     ? fastest_pulse(cfg.budget(), cfg.grid_n)
            : kind == "markovian" ? optimal_markovian_pulse(cfg.budget(), cfg.grid_n)
                                  : throw std::invalid_argument("--kind must be fastest or markovian");
  if (cfg.t_f) {
    p = p.t_f() <= *cfg.t_f ? extend_with_hold(p, *cfg.t_f, cfg.grid_n) : stretch_pulse(p, *cfg.t_f, cfg.grid_n);
  }
  const auto path = out_path(cfg, out_file);
  write_pulse_csv(path, p);
  kv("pulse_file", path);
  kv("t_f", num(p.t_f()));
  kv("energy", num(pulse_energy(p)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-constrained optimal control of a two-qubit state transfer under dephasing"};
  app.require_subcommand(1);

  Common c_eval, c_opt, c_sweep, c_mark, c_leak, c_orc, c_pulse;

  auto* eval = app.add_subcommand("evaluate", "Infidelity, energy and leakage of a pulse file");
  add_physics(eval, c_eval);
  std::string eval_pulse;
  bool eval_json = false;
  eval->add_option("--pulse", eval_pulse, "pulse CSV (t,phi,V)")->required();
  eval->add_flag("--json", eval_json, "print a JSON object");

  auto* opt = app.add_subcommand("optimize", "Optimal phase profile for one final time");
  add_physics(opt, c_opt);
  add_t_f(opt, c_opt);
  add_optimizer(opt, c_opt);
  add_out_dir(opt, c_opt);
  std::string opt_out;
  opt->add_option("--out", opt_out, "pulse CSV to write (default pulse.csv in the output directory)");

  auto* sweep = app.add_subcommand("sweep", "Optimal infidelity versus final time");
  add_physics(sweep, c_sweep);
  add_optimizer(sweep, c_sweep);
  add_out_dir(sweep, c_sweep);
  std::string tf_list = "1,2,3,4,5,6,7,8,9,10,11,12";
  std::string tc_list;
  bool no_warm = false;
  sweep->add_option("--t-f-list", tf_list, "final times in units of t_min")->capture_default_str();
  sweep->add_option("--t-c-list", tc_list, "correlation times in units of t_min (default: --t-c)");
  sweep->add_flag("--no-warm-start", no_warm, "solve points independently and concurrently");

  auto* mark = app.add_subcommand("markovian", "White-noise optimal profile and its energy constant");
  add_physics(mark, c_mark);
  add_out_dir(mark, c_mark);
  double tol = 1e-10;
  std::string profile_out, mark_pulse;
  mark->add_option("--tol", tol, "integration tolerance")->capture_default_str();
  mark->add_option("--profile-out", profile_out, "CSV of x,phi,dphi");
  mark->add_option("--pulse-out", mark_pulse, "pulse CSV of the profile at the given energy");

  auto* leak = app.add_subcommand("leakage", "Even-sector leakage without the rotating-wave approximation");
  add_physics(leak, c_leak);
  add_t_f(leak, c_leak);
  std::string leak_pulse, corrector;
  leak->add_option("--pulse", leak_pulse, "pulse CSV (default: fastest pulse)");
  leak->add_option("--corrector-times", corrector, "available times in units of t_min for the minimal corrector fit");

  auto* orc = app.add_subcommand("oracle", "Monte-Carlo transfer fidelity under Gaussian dephasing");
  add_physics(orc, c_orc);
  add_t_f(orc, c_orc);
  std::string orc_pulse;
  orc->add_option("--pulse", orc_pulse, "pulse CSV (default: fastest pulse)");
  add_override<std::size_t>(orc, c_orc, "--n-traj", "trajectories", [](RunConfig& r, std::size_t v) { r.oracle.n_traj = v; });
  add_override<std::uint64_t>(orc, c_orc, "--seed", "random seed", [](RunConfig& r, std::uint64_t v) { r.oracle.seed = v; });
  add_override<double>(orc, c_orc, "--dt", "integration step (default: largest allowed)",
                       [](RunConfig& r, double v) { r.oracle.dt = v; });
  orc->add_flag_function(
      "--rwa,!--no-rwa",
      [&c_orc](std::int64_t n) { c_orc.setters.push_back([n](RunConfig& r) { r.oracle.rwa = n > 0; }); },
      "rotating-wave approximation on or off");
  orc->add_flag_function(
      "--include-even,!--no-include-even",
      [&c_orc](std::int64_t n) { c_orc.setters.push_back([n](RunConfig& r) { r.oracle.include_even = n > 0; }); },
      "propagate the |gg>,|ee> sector");

  auto* pulse = app.add_subcommand("pulse", "Write a reference pulse (fastest ramp or Markovian profile)");
  add_physics(pulse, c_pulse);
  add_t_f(pulse, c_pulse);
  std::string kind = "fastest", pulse_out;
  pulse->add_option("--kind", kind, "fastest or markovian")->capture_default_str();
  pulse->add_option("--out", pulse_out, "pulse CSV to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) return cmd_evaluate(c_eval, eval_pulse, eval_json);
    if (*opt) return cmd_optimize(c_opt, opt_out);
    if (*sweep) return cmd_sweep(c_sweep, tf_list, tc_list, no_warm);
    if (*mark) return cmd_markovian(c_mark, tol, profile_out, mark_pulse);
    if (*leak) return cmd_leakage(c_leak, leak_pulse, corrector);
    if (*orc) return cmd_oracle(c_orc, orc_pulse);
    if (*pulse) return cmd_pulse(c_pulse, kind, pulse_out);
  } catch (const PulseFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
