// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mhd/dynamics.hpp"
#include "mhd/ergodicity.hpp"
#include "mhd/hormander.hpp"
#include "oracles.hpp"

using namespace mhd;

namespace {

// Tolerances and sizes.
constexpr double kEnergyProductionTol = 1e-11;
constexpr double kBracketTol = 1e-8;
constexpr int kBracketCases = 200;
constexpr int kRandomStatesPerN = 1000;
constexpr double kHalvingLow = 1.8, kHalvingHigh = 2.2;
constexpr double kSeFactor = 3.0;

const std::vector<WaveVector> kUnitSet{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
const std::vector<WaveVector> kAltSet{{1, 0, 0}, {0, 1, 1}, {0, 0, 1}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned threads() { return 0; }

noise::ForcingConfig unit_set_forcing(double sigma_sq) {
  // 3 modes x 2 channels x 2 amp^2 = sigma_sq
  return noise::isotropic_forcing(kUnitSet, std::sqrt(sigma_sq / 12.0));
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Outcome c1_cardinalities() {
  const std::size_t expected[] = {13, 62, 171};
  Outcome o{true, "D ="};
  for (int N = 1; N <= 3; ++N) {
    auto lat = build_lattice(N);
    std::size_t formula = (std::size_t(std::pow(2 * N + 1, 3)) - 1) / 2;
    o.pass = o.pass && lat->size() == expected[N - 1] && lat->size() == formula && lat->full_size() == 2 * formula;
    o.detail += fmt(" %zu", lat->size());
  }
  return o;
}

Outcome c2_empty_set() {
  Outcome o{true, "violations per N:"};
  for (int N = 1; N <= 4; ++N) {
    auto lat = build_lattice(N);
    std::size_t bad = oracle::negative_pair_sums_into_representatives(*lat);
    o.pass = o.pass && bad == 0;
    o.detail += fmt(" %zu", bad);
  }
  return o;
}

Outcome c3_energy_production() {
  Outcome o{true, "max |P|/E^1.5 per N:"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logE(-2.0, 2.0);
  for (int N = 1; N <= 3; ++N) {
    auto lat = build_lattice(N);
    double worst = 0.0;
    for (int i = 0; i < kRandomStatesPerN; ++i) {
      auto s = random_state(lat, 1000 * N + i, std::pow(10.0, logE(rng)));
      double e = energy(s);
      worst = std::max(worst, std::abs(dynamics::energy_production(s, *lat)) / std::pow(e, 1.5));
    }
    o.pass = o.pass && worst <= kEnergyProductionTol;
    o.detail += fmt(" %.2e", worst);
  }
  o.detail += fmt(" (tol %.0e, %d states each)", kEnergyProductionTol, kRandomStatesPerN);
  return o;
}

Outcome c4_brackets() {
  auto lat = build_lattice(2);
  std::mt19937_64 rng(4);
  double worst_exact = 0.0, worst_fd = 0.0;
  for (int t = 0; t < kBracketCases; ++t) {
    auto v = oracle::random_field(oracle::random_mode(*lat, rng), rng);
    auto w = oracle::random_field(oracle::random_mode(*lat, rng), rng);
    RealState br = hormander::double_bracket(v, w, *lat).to_real(lat);
    worst_exact = std::max(worst_exact, oracle::max_diff(br, dynamics::hessian_bilinear(v, w, lat)));
    worst_fd = std::max(worst_fd, oracle::max_diff(br, dynamics::hessian_bilinear(
                                                           v, w, lat, dynamics::HessianMethod::finite_difference)));
  }
  Outcome o;
  o.pass = worst_exact <= kBracketTol && worst_fd <= kBracketTol;
  o.detail = fmt("%d cases at N=2, max diff bilinear %.2e, finite-difference %.2e (tol %.0e)", kBracketCases,
                 worst_exact, worst_fd, kBracketTol);
  return o;
}

Outcome c5_closure() {
  Outcome o{true, ""};
  for (int N = 1; N <= 2; ++N) {
    auto lat = build_lattice(N);
    auto r = hormander::verdict(kUnitSet, *lat);
    int min_dim = 8;
    for (const auto& [k, d] : r.attained) min_dim = std::min(min_dim, d);
    bool ok = r.hypoelliptic && min_dim == 8 && r.A_of_N.size() == lat->full_size();
    o.pass = o.pass && ok;
    o.detail += fmt("N=%d |A|=%zu/%zu min dim %d; ", N, r.A_of_N.size(), lat->full_size(), min_dim);
  }
  o.detail += "{(1,0,0),(0,1,1),(0,0,1)} reported only:";
  for (int N = 1; N <= 2; ++N) {
    auto lat = build_lattice(N);
    auto r = hormander::verdict(kAltSet, *lat);
    o.detail += fmt(" N=%d %s |A|=%zu", N, r.hypoelliptic ? "hypoelliptic" : "not hypoelliptic", r.A_of_N.size());
  }
  return o;
}

Outcome c6_energy_identity() {
  ergodic::EnsembleSpec spec;
  spec.lattice = build_lattice(1);
  spec.n_trajectories = 1000;
  spec.base_seed = 6;
  noise::NoiseMatrix q = noise::NoiseMatrix::Zero();
  q.col(0) = CVec3(0, 1, std::complex<double>(0, 1));
  spec.forcing.set({1, 0, 0}, noise::Channel::velocity, q);
  spec.sampler = [lat = spec.lattice](std::uint64_t i) { return random_state(lat, 60000 + i, 1.0); };
  spec.integrator.dt = 1e-3;
  spec.integrator.t_end = 1.0;
  spec.integrator.record_every = 100;
  spec.integrator.store_states = false;
  spec.threads = threads();
  auto audit = ergodic::energy_balance_audit(spec);
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < audit.times.size(); ++i)
    worst_ratio = std::max(worst_ratio, std::abs(audit.mean_residual[i]) /
                                            (kSeFactor * audit.standard_error[i] + audit.bias_allowance[i]));

  // Deterministic halving: no noise, one trajectory, residual is pure discretization bias.
  auto det = spec;
  det.forcing = {};
  det.n_trajectories = 1;
  det.sampler = nullptr;
  det.init = random_state(spec.lattice, 61, 1.0);
  det.integrator.record_every = 1;
  double r1 = std::abs(ergodic::energy_balance_audit(det).mean_residual.back());
  det.integrator.dt /= 2;
  double r2 = std::abs(ergodic::energy_balance_audit(det).mean_residual.back());
  double ratio = r1 / r2;

  Outcome o;
  o.pass = audit.pass && ratio >= kHalvingLow && ratio <= kHalvingHigh;
  o.detail = fmt("sigma^2=%.3g n=%zu; at t=1 residual %.3e, SE %.3e, bias allowance %.3e; max |res|/(3SE+bias) %.3f; "
                 "deterministic residual ratio dt/(dt/2) = %.3f",
                 audit.sigma_sq, audit.n, audit.mean_residual.back(), audit.standard_error.back(),
                 audit.bias_allowance.back(), worst_ratio, ratio);
  return o;
}

Outcome c7_moment_bound() {
  ergodic::EnsembleSpec spec;
  spec.lattice = build_lattice(1);
  spec.n_trajectories = 500;
  spec.base_seed = 7;
  spec.forcing = unit_set_forcing(2.0);
  spec.sampler = [lat = spec.lattice](std::uint64_t i) { return random_state(lat, 70000 + i, 1.0); };
  spec.integrator.dt = 5e-3;
  spec.integrator.t_end = 20.0;
  spec.integrator.record_every = 200;
  spec.integrator.store_states = false;
  spec.threads = threads();
  std::vector<double> grid;
  for (int t = 1; t <= 20; ++t) grid.push_back(t);
  auto r = ergodic::moment_bound_check(spec, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.times.size(); ++i) worst = std::max(worst, r.mean_energy[i] - r.standard_error[i] * kSeFactor);
  Outcome o;
  o.pass = r.pass;
  o.detail = fmt("n=%zu E0=%.3f sigma^2=%.3g bound %.3f; mean at t=20 %.3f (SE %.3f); max mean-3SE %.3f", r.n,
                 r.initial_mean, r.sigma_sq, r.bound, r.mean_energy.back(), r.standard_error.back(), worst);
  return o;
}

Outcome c8_hitting() {
  ergodic::EnsembleSpec spec;
  spec.lattice = build_lattice(1);
  spec.n_trajectories = 1000;
  spec.base_seed = 8;
  noise::NoiseMatrix q = noise::NoiseMatrix::Zero();
  q.col(0) = CVec3(0, 1, std::complex<double>(0, 1)) / std::sqrt(2.0);
  spec.forcing.set({1, 0, 0}, noise::Channel::velocity, q);
  // Energy 16 spread evenly over e1 and e2 on both fields.
  SpectralState init(spec.lattice);
  init.set_mode({1, 0, 0}, CVec3(0, 2, 0), CVec3(0, 0, 2));
  init.set_mode({0, 1, 0}, CVec3(0, 0, 2), CVec3(2, 0, 0));
  spec.init = init;
  spec.integrator.dt = 1e-3;
  spec.integrator.t_end = 5.0;
  spec.integrator.store_states = false;
  spec.threads = threads();
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.05 * i);
  auto r = ergodic::hitting_times(spec, 2.0, grid);
  double worst = -1e9;
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    worst = std::max(worst, r.survival[i] - r.bound[i] - kSeFactor * r.standard_error[i]);
  Outcome o;
  o.pass = r.pass && std::abs(r.delta - 0.75) < 1e-12 && std::abs(r.initial_mean - 16.0) < 1e-9;
  o.detail = fmt("n=%zu eps0=%.3g delta=%.3g E0=%.3g censored=%zu; max(P-bound-3SE) = %.3f over %zu grid times",
                 r.samples.size(), r.eps0, r.delta, r.initial_mean, r.censored, worst, r.grid.size());
  return o;
}

Outcome c9_recurrence() {
  auto lat = build_lattice(1);
  sde::IntegratorConfig c;
  c.dt = 1e-2;
  c.t_end = 200.0;
  c.seed = 9;
  c.store_states = false;
  auto traj = sde::simulate(random_state(lat, 90, 1.0), unit_set_forcing(2.0), c, *lat);
  auto trend = ergodic::recurrence_trend(traj, 1.0, 1.0, {50, 100, 200});
  Outcome o;
  o.pass = trend.slope > 0.0;
  o.detail = fmt("radius^2=1 h=1: visits %zu/%zu/%zu at horizons 50/100/200, slope %.3f", trend.visits[0],
                 trend.visits[1], trend.visits[2], trend.slope);
  return o;
}

Outcome c10_measure() {
  auto lat = build_lattice(1);
  auto base = [&](double horizon) {
    ergodic::EnsembleSpec s;
    s.lattice = lat;
    s.n_trajectories = 20;
    s.base_seed = 10;
    s.forcing = unit_set_forcing(2.0);
    s.integrator.dt = 1e-2;
    s.integrator.t_end = horizon;
    s.integrator.record_every = 10;
    s.integrator.store_states = false;
    s.threads = threads();
    return s;
  };
  SpectralState zero(lat);
  SpectralState far = random_state(lat, 100, 50.0);
  std::vector<double> means;
  ergodic::MeasureReport last;
  for (double h : {125.0, 250.0, 500.0}) {
    auto a = base(h), b = base(h);
    a.init = zero;
    b.init = far;
    // Shared noise would synchronize the two ensembles exactly.
    b.base_seed = a.base_seed + 500;
    last = ergodic::empirical_measure_compare(a, b);
    means.push_back(last.mean);
  }
  auto a = base(500.0), b = base(500.0);
  a.init = zero;
  b.init = zero;
  b.base_seed = a.base_seed + 1000;
  auto noise_band = ergodic::empirical_measure_compare(a, b);
  double band = noise_band.mean + kSeFactor * std::hypot(noise_band.standard_error, last.standard_error);
  bool monotone = means[0] > means[1] && means[1] > means[2];
  Outcome o;
  o.pass = monotone && means[2] <= band;
  o.detail = fmt("%zu independent pairs, KS mean %.4f/%.4f/%.4f at horizons 125/250/500 (SE at 500 %.4f, CI [%.4f, %.4f]); "
                 "same-init seed-pair KS %.4f (SE %.4f), band %.4f",
                 last.n_pairs, means[0], means[1], means[2], last.standard_error, last.ci_low, last.ci_high,
                 noise_band.mean, noise_band.standard_error, band);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "lattice cardinalities", 1, c1_cardinalities},
      {2, "empty-set lemma N<=4", 10, c2_empty_set},
      {3, "nonlinear energy conservation", 30, c3_energy_production},
      {4, "double bracket vs Hessian oracle", 60, c4_brackets},
      {5, "hypoellipticity closure", 120, c5_closure},
      {6, "energy identity audit", 300, c6_energy_identity},
      {7, "moment bound", 300, c7_moment_bound},
      {8, "hitting-time tail", 600, c8_hitting},
      {9, "recurrence growth", 600, c9_recurrence},
      {10, "initial-condition independence", 900, c10_measure},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget_s;
    bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
