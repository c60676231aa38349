#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "support.hpp"
#include "xferopt/pulse.hpp"

using namespace xferopt;

TEST_CASE("energy budget and t_min") {
  const EnergyBudget b(2.0);
  CHECK(b.t_min() == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0));
  CHECK(EnergyBudget::from_t_min(3.0).t_min() == doctest::Approx(3.0));
  CHECK_THROWS_AS(EnergyBudget(0.0), std::invalid_argument);
  CHECK_THROWS_AS(EnergyBudget(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(EnergyBudget::from_t_min(0.0), std::invalid_argument);
}

TEST_CASE("pulse construction is validated") {
  CHECK_THROWS_AS(Pulse({0.0, 1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse({0.1, 1.0, 2.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse({0.0, 1.0, 2.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Pulse({0.0, NAN, 2.0}, 1.0), std::invalid_argument);
  const Pulse p({0.0, 0.5, 2.0}, 2.0);
  CHECK(p.segments() == 2);
  CHECK(p.dt() == 1.0);
  CHECK(p.max_phase() == 2.0);
  CHECK(p.phase_at(0.5) == doctest::Approx(0.25));
  CHECK(p.phase_at(5.0) == 2.0);
  const auto v = p.amplitudes();
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 1.5);
}

TEST_CASE("fastest pulse spends exactly the budget") {
  for (double e : {0.5, 2.4674011002723395, 10.0}) {
    const EnergyBudget b(e);
    const Pulse p = fastest_pulse(b, 64);
    CHECK(p.t_f() == doctest::Approx(b.t_min()));
    CHECK(p.final_phase() == kHalfPi);
    CHECK(pulse_energy(p) == doctest::Approx(e).epsilon(1e-13));
    CHECK(control_amplitude(p, 0.3 * p.t_f()) == doctest::Approx(2.0 * e / std::numbers::pi));
  }
}

TEST_CASE("any pulse reaching pi/2 costs at least the ramp energy") {
  // Cauchy-Schwarz: (pi/2)^2 <= t_f \int V^2
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double t_f = 0.5 + 5.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const Pulse p = testing::random_pulse(rng, t_f, 40);
    CHECK(pulse_energy(p) >= kHalfPi * kHalfPi / t_f * (1.0 - 1e-14));
  }
}

TEST_CASE("control amplitude domain") {
  const Pulse p = fastest_pulse(EnergyBudget(1.0), 8);
  CHECK_THROWS_AS(control_amplitude(p, -0.1), std::out_of_range);
  CHECK_THROWS_AS(control_amplitude(p, p.t_f() * 1.01), std::out_of_range);
  CHECK(control_amplitude(p, p.t_f()) == doctest::Approx(control_amplitude(p, 0.0)));
}

TEST_CASE("time scaling multiplies the energy") {
  std::mt19937_64 rng(11);
  const Pulse p = testing::random_pulse(rng, 2.0, 32);
  const Pulse q = scale_pulse(p, 3.0);
  CHECK(q.t_f() == doctest::Approx(2.0 / 3.0));
  CHECK(pulse_energy(q) == doctest::Approx(3.0 * pulse_energy(p)));
  const Pulse s = stretch_pulse(p, 4.0, 32);
  CHECK(pulse_energy(s) == doctest::Approx(0.5 * pulse_energy(p)));
  CHECK(s.final_phase() == p.final_phase());
}

TEST_CASE("hold extension keeps the energy on an aligned grid") {
  const Pulse p = fastest_pulse(EnergyBudget(kHalfPi * kHalfPi), 10);
  const Pulse q = extend_with_hold(p, 3.0, 30);
  CHECK(pulse_energy(q) == doctest::Approx(pulse_energy(p)).epsilon(1e-12));
  CHECK(q.phase(20) == kHalfPi);
  CHECK(q.phase(5) == doctest::Approx(p.phase(5)));
  CHECK_THROWS_AS(extend_with_hold(p, 0.5, 10), std::invalid_argument);
}

TEST_CASE("pulse CSV round trip is exact") {
  std::mt19937_64 rng(3);
  const Pulse p = testing::random_pulse(rng, 3.7, 25);
  std::stringstream ss;
  write_pulse_csv(ss, p);
  const Pulse q = read_pulse_csv(ss);
  REQUIRE(q.samples() == p.samples());
  CHECK(q.t_f() == doctest::Approx(p.t_f()).epsilon(1e-15));
  for (std::size_t k = 0; k < p.samples(); ++k) CHECK(q.phase(k) == p.phase(k));
}

namespace {

std::size_t error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_pulse_csv(in);
  } catch (const PulseFormatError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("malformed pulse CSV reports the offending line") {
  CHECK(error_line("") == 1);
  CHECK(error_line("time,phi,V\n0,0,1\n") == 1);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,0.5\n1,1,1\n") == 3);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,abc,1\n1,1,1\n") == 3);
  CHECK(error_line("t,phi,V\n0.1,0,1\n0.5,0.5,1\n1,1,1\n") == 2);
  CHECK(error_line("t,phi,V\n0,0.2,1\n0.5,0.5,1\n1,1,1\n") == 2);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,0.5,1\n0.4,1,1\n") == 4);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,0.5,1\n") == 3);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,0.5,1\n0.7,0.6,1\n1.5,1,1\n") != 0);
  CHECK(error_line("t,phi,V\n0,0,1\n0.5,0.5,1\n1,1,1\n") == 0);
}
