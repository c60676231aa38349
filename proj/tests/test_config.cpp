#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "xferopt/config.hpp"

using namespace xferopt;

TEST_CASE("flat and nested keys are equivalent") {
  RunConfig a, b;
  apply_config_json(a, R"({"bath.gamma": 0.2, "bath.t_c": 3, "control.t_f": 5, "control.grid_n": 64,
                          "system.omega0": 1.5, "optimizer.starts": ["ramp"], "oracle.rwa": false,
                          "oracle.n_traj": 100, "out.dir": "x"})");
  apply_config_json(b, R"({"bath": {"gamma": 0.2, "t_c": 3}, "control": {"t_f": 5, "grid_n": 64},
                          "system": {"omega0": 1.5}, "optimizer": {"starts": "ramp"},
                          "oracle": {"rwa": false, "n_traj": 100}, "out": {"dir": "x"}})");
  for (const RunConfig* c : {&a, &b}) {
    CHECK(c->bath.gamma == 0.2);
    CHECK(c->bath.t_c == 3.0);
    CHECK(c->final_time() == 5.0);
    CHECK(c->grid_n == 64);
    CHECK(c->omega0 == 1.5);
    CHECK(c->starts.size() == 1);
    CHECK_FALSE(c->oracle.rwa);
    CHECK(c->oracle.n_traj == 100);
    CHECK(c->out_dir == "x");
  }
}

TEST_CASE("config defaults and problem mapping") {
  RunConfig c;
  CHECK(c.final_time() == doctest::Approx(1.0));
  c.t_f = 4.0;
  c.leak_weight = 0.25;
  c.energy_mode = EnergyMode::at_most;
  const auto p = c.problem();
  CHECK(p.t_f == 4.0);
  CHECK(p.leak_weight == 0.25);
  CHECK(p.energy_mode == EnergyMode::at_most);
  CHECK(p.segments == c.grid_n);
}

TEST_CASE("bad configs are rejected with the key named") {
  RunConfig c;
  CHECK_THROWS_WITH_AS(apply_config_json(c, R"({"bath.gama": 1})"), doctest::Contains("bath.gama"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_config_json(c, R"({"bath.gamma": "x"})"), doctest::Contains("bath.gamma"),
                       std::invalid_argument);
  CHECK_THROWS_AS(apply_config_json(c, "[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_json(c, "{"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_json(c, R"({"oracle.n_traj": -3})"), std::invalid_argument);

  RunConfig d;
  d.t_f = 0.5;
  CHECK_THROWS_WITH_AS(d.validate(), doctest::Contains("t_min"), std::invalid_argument);
  d = RunConfig{};
  d.bath.t_c = 0.1;
  d.oracle.dt = 0.1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = RunConfig{};
  d.bath.gamma = -1.0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  CHECK_NOTHROW(RunConfig{}.validate());
}

TEST_CASE("list parsing") {
  CHECK(parse_double_list("1, 2.5,3") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK_THROWS_AS(parse_double_list("1,,2"), std::invalid_argument);
  CHECK(parse_start_list("overshoot,ramp") == std::vector<StartKind>{StartKind::overshoot, StartKind::ramp});
}

TEST_CASE("config file loading") {
  const auto path = std::filesystem::temp_directory_path() / "xferopt_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({"bath": {"gamma": 0.5}})";
  }
  CHECK(load_run_config(path.string()).bath.gamma == 0.5);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_run_config(path.string()), std::runtime_error);
}
