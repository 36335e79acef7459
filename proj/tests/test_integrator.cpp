#include <doctest.h>

#include <cmath>

#include "mhd/integrator.hpp"
#include "oracles.hpp"

using namespace mhd;
using namespace mhd::sde;

namespace {

IntegratorConfig quiet(double dt, double t_end, Scheme scheme = Scheme::exponential) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.scheme = scheme;
  return c;
}

const std::complex<double> I(0, 1);

}  // namespace

TEST_CASE("zero state without noise stays zero") {
  auto lat = build_lattice(2);
  SpectralState zero(lat);
  auto traj = simulate(zero, {}, quiet(0.01, 0.1), *lat);
  CHECK(max_abs(traj.final_state) == 0.0);
  for (double e : traj.energies) CHECK(e == 0.0);
}

TEST_CASE("single mode decays exactly under the exponential scheme") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  const WaveVector m{1, 0, 0};
  s.set_mode(m, CVec3(0, 1, I), CVec3(0, I, 0.5));
  noise::ForcingConfig none;
  noise::NoiseStreams streams(none, 0, 0);
  const double dt = 0.01;
  auto next = step(s, none, quiet(dt, dt), streams);
  const double f = std::exp(-dt);
  std::size_t i = lat->index_of(m);
  CHECK((next.u(i) - f * s.u(i)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((next.b(i) - f * s.b(i)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("self-convergence is first order for a two-mode deterministic run") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  s.set_mode({1, 0, 0}, CVec3(0, 2, 1.5 * I), CVec3(0, -I, 1.0));
  s.set_mode({0, 1, 0}, CVec3(1.5, 0, -2.0 * I), CVec3(0.5 * I, 0, 1.0));
  const double t = 0.5, dt = 0.01;
  for (Scheme scheme : {Scheme::exponential, Scheme::euler_maruyama}) {
    auto ref = simulate(s, {}, quiet(dt / 64, t, scheme), *lat).final_state;
    double e1 = oracle::max_diff(simulate(s, {}, quiet(dt, t, scheme), *lat).final_state, ref);
    double e2 = oracle::max_diff(simulate(s, {}, quiet(dt / 2, t, scheme), *lat).final_state, ref);
    CHECK(e1 > 0.0);
    double ratio = e1 / e2;
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}

TEST_CASE("t_end = dt records two snapshots") {
  auto lat = build_lattice(1);
  auto s = random_state(lat, 1, 1.0);
  auto traj = simulate(s, {}, quiet(0.01, 0.01), *lat);
  CHECK(traj.size() == 2);
  CHECK(traj.states.size() == 2);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[1] == doctest::Approx(0.01));
  CHECK(traj.dissipation_integral[0] == 0.0);
  CHECK(traj.dissipation_integral[1] == doctest::Approx(0.01 * dissipation_rate(s)));
}

TEST_CASE("record stride keeps the final step") {
  auto lat = build_lattice(1);
  auto s = random_state(lat, 2, 1.0);
  auto c = quiet(0.01, 0.25);
  c.record_every = 10;
  c.store_states = false;
  auto traj = simulate(s, {}, c, *lat);
  CHECK(traj.times.size() == 4);  // 0, 0.1, 0.2, 0.25
  CHECK(traj.times.back() == doctest::Approx(0.25));
  CHECK(traj.states.empty());
}

TEST_CASE("noise-free energy is non-increasing and below the e^{-2t} envelope") {
  for (int N : {1, 2}) {
    auto lat = build_lattice(N);
    auto s = random_state(lat, 10 + N, 5.0);
    auto traj = simulate(s, {}, quiet(1e-3, 1.0), *lat);
    for (std::size_t i = 1; i < traj.size(); ++i) {
      CHECK(traj.energies[i] <= traj.energies[i - 1] * (1 + 1e-12));
      CHECK(traj.energies[i] <= 1.1 * traj.energies[0] * std::exp(-2 * traj.times[i]));
    }
  }
}

TEST_CASE("forced trajectories are reproducible and divergence-free") {
  auto lat = build_lattice(2);
  auto forcing = noise::isotropic_forcing({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 1.0);
  auto s = random_state(lat, 3, 2.0);
  auto c = quiet(1e-3, 0.2);
  c.seed = 77;
  auto a = simulate(s, forcing, c, *lat, 4);
  auto b = simulate(s, forcing, c, *lat, 4);
  auto other = simulate(s, forcing, c, *lat, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(oracle::max_diff(a.states[i], b.states[i]) == 0.0);
  CHECK(oracle::max_diff(a.final_state, other.final_state) > 0.0);
  CHECK(trajectory_csv(a, true) == trajectory_csv(b, true));
  for (const auto& st : a.states) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      Vec3 k = lat->mode(i).as_vector();
      CHECK(std::abs(kdot(k, st.u(i))) <= 1e-12);
      CHECK(std::abs(kdot(k, st.b(i))) <= 1e-12);
    }
  }
}

TEST_CASE("Euler-Maruyama with an absurd step blows up with diagnostics") {
  auto lat = build_lattice(2);
  auto s = random_state(lat, 4, 10.0);
  auto c = quiet(1.0, 200.0, Scheme::euler_maruyama);
  try {
    simulate(s, {}, c, *lat);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() > 0.0);
    CHECK(lat->contains(e.mode()));
    REQUIRE(e.partial());
    CHECK(e.partial()->size() >= 1);
  }
}

TEST_CASE("configuration validation") {
  auto c = quiet(0.0, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quiet(0.3, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quiet(0.01, 1.0);
  c.record_every = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_scheme("em") == Scheme::euler_maruyama);
  CHECK(parse_scheme(to_string(Scheme::exponential)) == Scheme::exponential);
  CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
}

TEST_CASE("CSV layout") {
  auto lat = build_lattice(1);
  auto s = random_state(lat, 5, 1.0);
  auto traj = simulate(s, {}, quiet(0.1, 0.2), *lat);
  std::string csv = trajectory_csv(traj, true);
  std::string head = csv.substr(0, csv.find('\n'));
  CHECK(head.rfind("t,energy_u,energy_b,u2_", 0) == 0);
  CHECK(head.find(",u2_1_0_0,b2_1_0_0") != std::string::npos);
  CHECK(std::count(head.begin(), head.end(), ',') == 2 + 26);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  auto snap = snapshot_json(traj.final_state, 0.2);
  CHECK(snap["modes"].size() == 13);
}
