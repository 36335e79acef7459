#include <doctest.h>

#include "mhd/state.hpp"
#include "oracles.hpp"

using namespace mhd;

TEST_CASE("zero state has zero energy and is valid") {
  auto lat = build_lattice(2);
  SpectralState s(lat);
  CHECK(energy(s) == 0.0);
  CHECK(validate(s, *lat).empty());
}

TEST_CASE("-k access returns the conjugate") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  CVec3 u(std::complex<double>(0, 0), std::complex<double>(1, 2), std::complex<double>(3, -1));
  s.set_mode({1, 0, 0}, u, CVec3::Zero());
  CHECK(s.u_at({-1, 0, 0}) == u.conjugate());
  s.set_mode({-1, 0, 0}, u, CVec3::Zero());
  CHECK(s.u_at({1, 0, 0}) == u.conjugate());
  CHECK_THROWS_AS(s.u_at({2, 0, 0}), OutOfLatticeError);
}

TEST_CASE("real coordinates split u = r + i s, b = r~ + i s~") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  const std::size_t i = lat->index_of({1, 0, 0});
  s.u(i) = CVec3(0, std::complex<double>(1, 2), std::complex<double>(-3, 0.5));
  s.b(i) = CVec3(0, std::complex<double>(0, 1), 0);
  RealState x = to_real(s);
  CHECK(x[i].r == Vec3(0, 1, -3));
  CHECK(x[i].s == Vec3(0, 2, 0.5));
  CHECK(x[i].rt == Vec3(0, 0, 0));
  CHECK(x[i].st == Vec3(0, 1, 0));
}

TEST_CASE("to_complex(to_real(s)) is bit-exact") {
  for (int N = 1; N <= 3; ++N) {
    auto lat = build_lattice(N);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SpectralState s = random_state(lat, seed, 3.7);
      SpectralState back = to_complex(to_real(s));
      for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.u(i) == s.u(i));
        CHECK(back.b(i) == s.b(i));
      }
    }
  }
}

TEST_CASE("random_state hits the target energy and is divergence-free") {
  auto lat = build_lattice(2);
  SpectralState s = random_state(lat, 5, 12.5);
  CHECK(energy(s) == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(validate(s, *lat).empty());
  SpectralState low = random_state(lat, 5, 1.0, 1);
  for (std::size_t i = 0; i < lat->size(); ++i)
    if (lat->mode(i).sup_norm() > 1) CHECK(low.u(i).isZero(0.0));
}

TEST_CASE("validate reports divergence violations") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  s.set_mode({1, 0, 0}, CVec3(1, 0, 0), CVec3::Zero());
  auto d = validate(s, *lat);
  REQUIRE(d.size() == 1);
  CHECK(d[0].kind == Diagnostic::Kind::divergence);
  CHECK(d[0].mode == WaveVector{1, 0, 0});
  CHECK(d[0].field == "u");
  CHECK_THROWS_AS(require_valid(s, *lat), ValidationError);
}

TEST_CASE("validate reports structural violations for foreign lattices") {
  auto big = build_lattice(2);
  auto small = build_lattice(1);
  SpectralState s(big);
  auto d = validate(s, *small);
  CHECK(d.size() == 62 - 13);
  for (const auto& x : d) CHECK(x.kind == Diagnostic::Kind::structural);
  SpectralState t(small);
  auto missing = validate(t, *big);
  CHECK(missing.size() == 62 - 13);
}

TEST_CASE("validate reports non-finite coefficients") {
  auto lat = build_lattice(1);
  SpectralState s(lat);
  s.u(0)[0] = std::numeric_limits<double>::quiet_NaN();
  auto d = validate(s, *lat);
  REQUIRE(!d.empty());
  CHECK(d[0].kind == Diagnostic::Kind::non_finite);
}

TEST_CASE("snapshot JSON round trip") {
  auto lat = build_lattice(2);
  SpectralState s = random_state(lat, 9, 2.0);
  auto j = state_to_json(s, 0.5);
  CHECK(j["N"] == 2);
  SpectralState back = state_from_json(nlohmann::json::parse(j.dump()), lat);
  CHECK(oracle::max_diff(s, back) == 0.0);
  nlohmann::json bad = {{"modes", {{{"k", {3, 0, 0}}}}}};
  CHECK_THROWS_AS(state_from_json(bad, lat), ConfigError);
}
