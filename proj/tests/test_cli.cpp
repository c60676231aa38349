#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "xferopt_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = std::string(XFEROPT_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::map<std::string, std::string> fields(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) m[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return m;
}

double num(const std::map<std::string, std::string>& m, const std::string& key) {
  REQUIRE(m.count(key) == 1);
  return std::stod(m.at(key));
}

}  // namespace

TEST_CASE("cli markovian prints the profile constant") {
  const auto r = run("markovian");
  REQUIRE(r.code == 0);
  CHECK(std::abs(num(fields(r.out), "e_M") - 1.038) <= 0.001);
}

TEST_CASE("cli evaluate reports both infidelity routes") {
  const auto pulse = (scratch() / "fast.csv").string();
  REQUIRE(run("pulse --kind fastest --grid-n 512 --out " + pulse).code == 0);

  auto r = run("evaluate --pulse " + pulse + " --gamma 1 --t-c 0");
  REQUIRE(r.code == 0);
  auto f = fields(r.out);
  const double expected = 3.141592653589793 * 3.141592653589793 / (8.0 * num(f, "energy_budget"));
  CHECK(num(f, "infidelity") == doctest::Approx(expected).epsilon(1e-3));

  r = run("evaluate --pulse " + pulse + " --gamma 0 --t-c 1");
  REQUIRE(r.code == 0);
  CHECK(num(fields(r.out), "infidelity") == 0.0);

  r = run("evaluate --json --pulse " + pulse + " --gamma 0.3 --t-c 0.7 --omega0 3.141592653589793");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["freq_time_rel_diff"].get<double>() < 1e-6);
  CHECK(std::abs(j["leakage"].get<double>() - 0.026) <= 0.002);
}

TEST_CASE("cli leakage on the fastest pulse") {
  const auto r = run("leakage --omega0 3.141592653589793");
  REQUIRE(r.code == 0);
  CHECK(std::abs(num(fields(r.out), "leakage") - 0.026) <= 0.002);
  CHECK(run("leakage").code != 0);
}

TEST_CASE("cli oracle with an ideal pulse") {
  const auto r = run("oracle --gamma 0 --n-traj 50");
  REQUIRE(r.code == 0);
  CHECK(num(fields(r.out), "mean") == doctest::Approx(1.0).epsilon(1e-10));
  const auto bad = run("oracle --gamma 0.1 --t-c 0.1 --dt 0.5 --n-traj 5");
  CHECK(bad.code != 0);
  CHECK(bad.err.find("dt") != std::string::npos);
}

TEST_CASE("cli rejects malformed pulse files with a line number") {
  const auto path = scratch() / "bad.csv";
  {
    std::ofstream out(path);
    out << "t,phi,V\n0,0,1\n0.5,0.5,1\n0.4,1,1\n";
  }
  const auto r = run("evaluate --pulse " + path.string());
  CHECK(r.code != 0);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(run("optimize --t-f 0.5").code != 0);
}

TEST_CASE("cli config file with flag override") {
  const auto cfg = scratch() / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"bath": {"gamma": 0.5, "t_c": 0}, "control": {"grid_n": 64}})";
  }
  const auto pulse = (scratch() / "fast64.csv").string();
  REQUIRE(run("pulse --config " + cfg.string() + " --out " + pulse).code == 0);
  const auto a = fields(run("evaluate --config " + cfg.string() + " --pulse " + pulse).out);
  const auto b = fields(run("evaluate --config " + cfg.string() + " --gamma 1 --pulse " + pulse).out);
  CHECK(num(b, "infidelity") == doctest::Approx(2.0 * num(a, "infidelity")));
}

TEST_CASE("cli optimize writes a feasible pulse") {
  const auto dir = scratch() / "opt";
  const auto r = run("optimize --gamma 1 --t-c 0 --t-f 3 --grid-n 64 --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  const auto f = fields(r.out);
  CHECK(f.at("converged") == "true");
  CHECK(std::abs(num(f, "energy_residual")) < 1e-6);
  CHECK(fs::exists(dir / "pulse.csv"));
}

TEST_CASE("cli sweep is reproducible and handles duplicates") {
  const auto a = scratch() / "sweep_a";
  const auto b = scratch() / "sweep_b";
  const std::string args = " --gamma 1 --grid-n 48 --t-f-list 1,2,2,3 --t-c-list 0,2 --out-dir ";
  REQUIRE(run("sweep" + args + a.string()).code == 0);
  REQUIRE(run("sweep" + args + b.string()).code == 0);
  const auto csv = slurp(a / "sweep.csv");
  CHECK(csv == slurp(b / "sweep.csv"));
  std::istringstream in(csv);
  std::string header, r1, r2, r3;
  std::getline(in, header);
  CHECK(header == "tf_over_tmin,tc_over_tmin,infidelity,energy,max_phi,converged,pulse_file");
  std::getline(in, r1);
  std::getline(in, r2);
  std::getline(in, r3);
  CHECK(r2 == r3);
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() != "sweep.csv") CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(run("sweep --t-f-list 0.5,2 --out-dir " + a.string()).code != 0);
}

TEST_CASE("cli creates the output directory for bare file names") {
  const auto dir = scratch() / "fresh" / "nested";
  const auto cfg = scratch() / "outdir.json";
  {
    std::ofstream out(cfg);
    out << R"({"out.dir": ")" << dir.string() << R"(", "control.grid_n": 32})";
  }
  REQUIRE(run("pulse --config " + cfg.string() + " --out p.csv").code == 0);
  CHECK(fs::exists(dir / "p.csv"));
  REQUIRE(run("markovian --config " + cfg.string() + " --profile-out prof.csv").code == 0);
  CHECK(slurp(dir / "prof.csv").rfind("x,phi,dphi\n", 0) == 0);
}
