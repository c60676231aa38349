#include "xferopt/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "xferopt/csv.hpp"

namespace xferopt {

namespace {

using nlohmann::json;

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, out);
    } else {
      out.emplace_back(key, *it);
    }
  }
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw std::invalid_argument("config key '" + key + "' must be a non-negative integer");
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw std::invalid_argument("config key '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

void apply_key(RunConfig& c, const std::string& key, const json& v) {
  if (key == "bath.gamma") {
    c.bath.gamma = as_double(key, v);
  } else if (key == "bath.t_c") {
    c.bath.t_c = as_double(key, v);
  } else if (key == "bath.corr_norm") {
    c.bath.corr_norm = as_double(key, v);
  } else if (key == "control.energy") {
    c.energy = as_double(key, v);
  } else if (key == "control.t_f") {
    if (v.is_null()) {
      c.t_f.reset();
    } else {
      c.t_f = as_double(key, v);
    }
  } else if (key == "control.grid_n") {
    c.grid_n = as_count(key, v);
  } else if (key == "system.omega0") {
    c.omega0 = as_double(key, v);
  } else if (key == "optimizer.leak_weight") {
    c.leak_weight = as_double(key, v);
  } else if (key == "optimizer.starts") {
    if (v.is_string()) {
      c.starts = parse_start_list(v.get<std::string>());
    } else if (v.is_array()) {
      c.starts.clear();
      for (const auto& e : v) c.starts.push_back(parse_start_kind(as_string(key, e)));
    } else {
      throw std::invalid_argument("config key 'optimizer.starts' must be a list of start names");
    }
  } else if (key == "optimizer.energy_mode") {
    c.energy_mode = parse_energy_mode(as_string(key, v));
  } else if (key == "optimizer.max_iterations") {
    c.optimizer.max_iterations = static_cast<int>(as_count(key, v));
  } else if (key == "optimizer.max_outer") {
    c.optimizer.max_outer = static_cast<int>(as_count(key, v));
  } else if (key == "optimizer.grad_tol") {
    c.optimizer.grad_tol = as_double(key, v);
  } else if (key == "oracle.n_traj") {
    c.oracle.n_traj = as_count(key, v);
  } else if (key == "oracle.seed") {
    c.oracle.seed = as_count(key, v);
  } else if (key == "oracle.dt") {
    c.oracle.dt = as_double(key, v);
  } else if (key == "oracle.rwa") {
    c.oracle.rwa = as_bool(key, v);
  } else if (key == "oracle.include_even") {
    c.oracle.include_even = as_bool(key, v);
  } else if (key == "out.dir") {
    c.out_dir = as_string(key, v);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  bath.validate();
  if (!(energy > 0.0) || !std::isfinite(energy)) throw std::invalid_argument("control.energy must be positive");
  const double t_min = budget().t_min();
  if (t_f) {
    if (!(*t_f > 0.0) || !std::isfinite(*t_f)) throw std::invalid_argument("control.t_f must be positive");
    if (*t_f < t_min * (1.0 - 1e-12)) {
      throw std::invalid_argument("control.t_f = " + format_double(*t_f) + " is below t_min = " + format_double(t_min) +
                                  " = pi^2/(4 E); raise t_f or control.energy");
    }
  }
  if (grid_n < 4) throw std::invalid_argument("control.grid_n must be at least 4");
  if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw std::invalid_argument("system.omega0 must be >= 0");
  if (!(leak_weight >= 0.0)) throw std::invalid_argument("optimizer.leak_weight must be >= 0");
  if (starts.empty()) throw std::invalid_argument("optimizer.starts must name at least one start");
  if (optimizer.max_iterations < 1 || optimizer.max_outer < 1) {
    throw std::invalid_argument("optimizer iteration limits must be >= 1");
  }
  if (!(optimizer.grad_tol > 0.0)) throw std::invalid_argument("optimizer.grad_tol must be positive");
  oracle.validate();
  if (!bath.markovian() && oracle.dt > bath.t_c / 10.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("oracle.dt must not exceed bath.t_c / 10 = " + format_double(bath.t_c / 10.0));
  }
  if (!oracle.rwa && omega0 > 0.0 && oracle.dt > 0.01 / omega0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("oracle.dt must not exceed 0.01 / system.omega0 without the rotating-wave approximation");
  }
}

OptimizationProblem RunConfig::problem() const {
  OptimizationProblem p;
  p.bath = bath;
  p.budget = budget();
  p.t_f = final_time();
  p.omega0 = omega0;
  p.leak_weight = leak_weight;
  p.segments = grid_n;
  p.energy_mode = energy_mode;
  p.starts.kinds = starts;
  p.options = optimizer;
  return p;
}

void apply_config_json(RunConfig& cfg, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::vector<std::pair<std::string, json>> entries;
  flatten(doc, "", entries);
  for (const auto& [key, value] : entries) apply_key(cfg, key, value);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_config_json(cfg, buf.str());
  return cfg;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto field : split_csv_row(text)) {
    double v = 0.0;
    if (!parse_double(field, v)) throw std::invalid_argument("not a number in list: '" + std::string(field) + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<StartKind> parse_start_list(std::string_view text) {
  std::vector<StartKind> out;
  for (auto field : split_csv_row(text)) out.push_back(parse_start_kind(std::string(field)));
  return out;
}

void ensure_writable_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const auto probe = std::filesystem::path(dir) / ".xferopt_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace xferopt
