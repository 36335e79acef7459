#include "mhd/ergodicity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace mhd::ergodic {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double lambda_max(const ModeLattice& lat) {
  double m = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) m = std::max(m, lat.norm_sq(i));
  return m;
}

// Index of the recorded time equal to t (within rounding), else throws.
std::size_t record_index(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * std::max(1.0, std::abs(t)));
  if (it == times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw ConfigError("time " + fmt(t) + " is not a recorded time (check dt and record_every)");
  return static_cast<std::size_t>(it - times.begin());
}

void require_runs(const std::vector<sde::Trajectory>& runs) {
  if (runs.empty()) throw ConfigError("empty ensemble");
  for (const auto& r : runs)
    if (r.size() != runs.front().size()) throw ConfigError("ensemble trajectories have different record grids");
}

}  // namespace

std::pair<double, double> mean_se(const std::vector<double>& x) {
  if (x.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  if (x.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return {m, sd / std::sqrt(static_cast<double>(x.size()))};
}

void EnsembleSpec::validate() const {
  if (!lattice) throw ConfigError("ensemble spec has no lattice");
  if (n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1");
  integrator.validate();
  if (!sampler) {
    if (init.empty()) throw ConfigError("ensemble spec has neither init state nor sampler");
    if (init.lattice().truncation() != lattice->truncation())
      throw ConfigError("initial state lattice does not match ensemble lattice");
  }
}

SpectralState EnsembleSpec::initial_state(std::uint64_t trajectory) const {
  return sampler ? sampler(trajectory) : init;
}

nlohmann::json EnsembleSpec::to_json() const {
  nlohmann::json j;
  j["N"] = lattice ? lattice->truncation() : 0;
  j["trajectories"] = n_trajectories;
  j["base_seed"] = base_seed;
  j["forcing"] = forcing.to_json();
  j["integrator"] = integrator.to_json();
  j["integrator"]["seed"] = base_seed;
  if (!sampler && !init.empty()) j["init_energy"] = energy(init);
  else j["init"] = "sampler";
  return j;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = threads == 0 ? hw : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<sde::Trajectory> run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  sde::IntegratorConfig cfg = spec.integrator;
  cfg.seed = spec.base_seed;
  std::vector<sde::Trajectory> out(spec.n_trajectories);
  parallel_for(spec.n_trajectories, spec.threads, [&](std::size_t i) {
    out[i] = sde::simulate(spec.initial_state(i), spec.forcing, cfg, *spec.lattice, i);
  });
  return out;
}

double bias_density(double lam, double E, double power, double sigma_sq) {
  double nn = std::sqrt(std::max(0.0, power));
  return 2.0 * lam * lam * E + 3.0 * lam * std::sqrt(std::max(0.0, E)) * nn + power + lam * sigma_sq;
}

EnergyAuditReport energy_balance_audit(const EnsembleSpec& spec) {
  return energy_balance_audit(spec, run_ensemble(spec));
}

EnergyAuditReport energy_balance_audit(const EnsembleSpec& spec, const std::vector<sde::Trajectory>& runs) {
  require_runs(runs);
  EnergyAuditReport rep;
  rep.n = runs.size();
  rep.sigma_sq = noise::intensity(spec.forcing).sigma_sq();
  rep.dt = spec.integrator.dt;
  rep.config = spec.to_json();
  const double lam = lambda_max(*spec.lattice);
  const auto& times = runs.front().times;
  rep.times = times;
  std::vector<double> density(times.size(), 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (const auto& r : runs) density[j] += bias_density(lam, r.energies[j], r.nonlinear_power[j], rep.sigma_sq);
    density[j] /= static_cast<double>(runs.size());
  }
  double integral = 0.0;
  rep.pass = true;
  std::vector<double> res(runs.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0) integral += 0.5 * (density[j] + density[j - 1]) * (times[j] - times[j - 1]);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& r = runs[i];
      res[i] = r.energies[j] + r.dissipation_integral[j] - r.energies[0] - rep.sigma_sq * times[j];
    }
    auto [m, se] = mean_se(res);
    double allow = rep.dt * integral;
    bool ok = std::abs(m) <= 3.0 * se + allow;
    rep.mean_residual.push_back(m);
    rep.standard_error.push_back(se);
    rep.bias_allowance.push_back(allow);
    rep.within.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

nlohmann::json EnergyAuditReport::to_json() const {
  std::vector<int> w(within.begin(), within.end());
  return {{"report", "energy_balance_audit"},
          {"n", n},
          {"sigma_sq", sigma_sq},
          {"dt", dt},
          {"policy", "|residual| <= 3 SE + bias allowance"},
          {"final_residual", mean_residual.empty() ? 0.0 : mean_residual.back()},
          {"final_se", standard_error.empty() ? 0.0 : standard_error.back()},
          {"final_allowance", bias_allowance.empty() ? 0.0 : bias_allowance.back()},
          {"pass", pass},
          {"config", config}};
}

std::string EnergyAuditReport::to_csv() const {
  std::ostringstream os;
  os << "t,mean_residual,standard_error,bias_allowance,within\n";
  for (std::size_t j = 0; j < times.size(); ++j)
    os << fmt(times[j]) << ',' << fmt(mean_residual[j]) << ',' << fmt(standard_error[j]) << ','
       << fmt(bias_allowance[j]) << ',' << (within[j] ? 1 : 0) << '\n';
  return os.str();
}

MomentBoundReport moment_bound_check(const EnsembleSpec& spec, const std::vector<double>& t_grid) {
  return moment_bound_check(spec, run_ensemble(spec), t_grid);
}

MomentBoundReport moment_bound_check(const EnsembleSpec& spec, const std::vector<sde::Trajectory>& runs,
                                     const std::vector<double>& t_grid) {
  require_runs(runs);
  MomentBoundReport rep;
  rep.n = runs.size();
  rep.sigma_sq = noise::intensity(spec.forcing).sigma_sq();
  rep.config = spec.to_json();
  std::vector<double> e0;
  for (const auto& r : runs) e0.push_back(r.energies.front());
  rep.initial_mean = mean_se(e0).first;
  rep.bound = rep.initial_mean + 0.5 * rep.sigma_sq;
  rep.pass = true;
  std::vector<double> e(runs.size());
  for (double t : t_grid) {
    std::size_t j = record_index(runs.front().times, t);
    for (std::size_t i = 0; i < runs.size(); ++i) e[i] = runs[i].energies[j];
    auto [m, se] = mean_se(e);
    bool ok = m <= rep.bound + 3.0 * se;
    rep.times.push_back(t);
    rep.mean_energy.push_back(m);
    rep.standard_error.push_back(se);
    rep.within.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

nlohmann::json MomentBoundReport::to_json() const {
  double worst = -1e300;
  for (std::size_t j = 0; j < times.size(); ++j) worst = std::max(worst, mean_energy[j] - bound - 3 * standard_error[j]);
  return {{"report", "moment_bound_check"},
          {"n", n},
          {"sigma_sq", sigma_sq},
          {"initial_mean", initial_mean},
          {"bound", bound},
          {"policy", "mean energy <= E[energy(0)] + sigma^2/2 + 3 SE"},
          {"worst_excess", times.empty() ? 0.0 : worst},
          {"pass", pass},
          {"config", config}};
}

std::string MomentBoundReport::to_csv() const {
  std::ostringstream os;
  os << "t,mean_energy,standard_error,bound,within\n";
  for (std::size_t j = 0; j < times.size(); ++j)
    os << fmt(times[j]) << ',' << fmt(mean_energy[j]) << ',' << fmt(standard_error[j]) << ',' << fmt(bound) << ','
       << (within[j] ? 1 : 0) << '\n';
  return os.str();
}

double ou_stationary_energy(const noise::ForcingConfig& forcing) {
  double e = 0.0;
  for (const auto& m : forcing.modes())
    e += (m.q_u.squaredNorm() + m.q_b.squaredNorm()) / (2.0 * m.mode.norm_sq());
  return e;
}

HittingReport hitting_times(const EnsembleSpec& spec, double C, const std::vector<double>& t_grid) {
  spec.validate();
  noise::NoiseIntensity ni = noise::intensity(spec.forcing);
  if (!(C > 0.0)) throw ConfigError("hitting threshold C must be positive");
  if (!(C * C > ni.eps0()))
    throw ConfigError("hitting-time bound requires C^2 > eps0_u + eps0_b (C^2 = " + fmt(C * C) +
                      ", eps0 = " + fmt(ni.eps0()) + "); otherwise delta <= 0 and the bound is vacuous");
  HittingReport rep;
  rep.C = C;
  rep.eps0 = ni.eps0();
  rep.delta = 1.0 - ni.eps0() / (C * C);
  rep.horizon = spec.integrator.t_end;
  rep.config = spec.to_json();
  rep.config["C"] = C;

  sde::IntegratorConfig cfg = spec.integrator;
  cfg.seed = spec.base_seed;
  const std::size_t steps = cfg.steps();
  const double c2 = C * C;
  rep.samples.resize(spec.n_trajectories);
  std::vector<double> e0(spec.n_trajectories);
  parallel_for(spec.n_trajectories, spec.threads, [&](std::size_t i) {
    SpectralState x = spec.initial_state(i);
    require_valid(x, *spec.lattice, 1e-9);
    e0[i] = energy(x);
    HittingSample s{C, rep.horizon, true};
    if (e0[i] <= c2) {
      s = {C, 0.0, false};
    } else {
      sde::Stepper stepper(spec.lattice, spec.forcing, cfg, i);
      for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        x = stepper.step(x, t);
        if (energy(x) <= c2) {
          s = {C, static_cast<double>(n + 1) * cfg.dt, false};
          break;
        }
      }
    }
    rep.samples[i] = s;
  });
  rep.initial_mean = mean_se(e0).first;
  for (const auto& s : rep.samples) rep.censored += s.censored ? 1 : 0;

  const double n = static_cast<double>(rep.samples.size());
  rep.pass = true;
  for (double t : t_grid) {
    if (t > rep.horizon + 1e-12) throw ConfigError("grid time " + fmt(t) + " beyond horizon");
    double count = 0.0;
    for (const auto& s : rep.samples)
      if (s.censored || s.tau >= t - 1e-12) count += 1.0;
    double p = count / n;
    double se = std::sqrt(p * (1.0 - p) / n);
    double b = rep.initial_mean / c2 * std::exp(-2.0 * rep.delta * t);
    bool ok = p <= b + 3.0 * se;
    rep.grid.push_back(t);
    rep.survival.push_back(p);
    rep.standard_error.push_back(se);
    rep.bound.push_back(b);
    rep.within.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

nlohmann::json HittingReport::to_json() const {
  std::vector<double> taus;
  for (const auto& s : samples) taus.push_back(s.tau);
  auto [m, se] = mean_se(taus);
  return {{"report", "hitting_times"},
          {"C", C},
          {"eps0", eps0},
          {"delta", delta},
          {"initial_mean", initial_mean},
          {"horizon", horizon},
          {"n", samples.size()},
          {"censored", censored},
          {"mean_tau", m},
          {"mean_tau_se", se},
          {"policy", "P(tau >= t) <= (E[energy(0)]/C^2) exp(-2 delta t) + 3 SE"},
          {"pass", pass},
          {"config", config}};
}

std::string HittingReport::to_csv() const {
  std::ostringstream os;
  os << "t,survival,standard_error,bound,within\n";
  for (std::size_t j = 0; j < grid.size(); ++j)
    os << fmt(grid[j]) << ',' << fmt(survival[j]) << ',' << fmt(standard_error[j]) << ',' << fmt(bound[j]) << ','
       << (within[j] ? 1 : 0) << '\n';
  return os.str();
}

RecurrenceCount recurrence_count(const sde::Trajectory& traj, double radius, double h, double horizon) {
  if (!(h > 0.0)) throw ConfigError("recurrence interval h must be positive");
  if (!(radius >= 0.0)) throw ConfigError("ball radius must be non-negative");
  if (traj.times.empty()) throw ConfigError("empty trajectory");
  RecurrenceCount rc;
  rc.h = h;
  rc.radius = radius;
  rc.horizon = horizon > 0.0 ? horizon : traj.times.back();
  if (rc.horizon > traj.times.back() * (1.0 + 1e-12))
    throw ConfigError("recurrence horizon exceeds trajectory length");
  rc.slots = static_cast<std::size_t>(std::floor(rc.horizon / h + 1e-9));
  const double r2 = radius * radius;
  for (std::size_t n = 1; n <= rc.slots; ++n) {
    double t = static_cast<double>(n) * h;
    std::size_t j = record_index(traj.times, t);
    if (traj.energies[j] <= r2) rc.visit_times.push_back(t);
  }
  rc.visits = rc.visit_times.size();
  if (!rc.visit_times.empty()) rc.first_visit = rc.visit_times.front();
  if (rc.visit_times.size() >= 2) {
    double sum = 0.0;
    for (std::size_t i = 1; i < rc.visit_times.size(); ++i) {
      double g = rc.visit_times[i] - rc.visit_times[i - 1];
      sum += g;
      rc.max_gap = std::max(rc.max_gap, g);
    }
    rc.mean_gap = sum / static_cast<double>(rc.visit_times.size() - 1);
  }
  return rc;
}

nlohmann::json RecurrenceCount::to_json() const {
  return {{"h", h},           {"radius", radius},     {"horizon", horizon},   {"visits", visits},
          {"slots", slots},   {"mean_gap", mean_gap}, {"max_gap", max_gap},   {"first_visit", first_visit}};
}

RecurrenceTrend recurrence_trend(const sde::Trajectory& traj, double radius, double h,
                                 const std::vector<double>& horizons) {
  RecurrenceTrend tr;
  for (double H : horizons) {
    tr.horizons.push_back(H);
    tr.visits.push_back(recurrence_count(traj, radius, h, H).visits);
  }
  const double n = static_cast<double>(horizons.size());
  if (horizons.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      mx += tr.horizons[i];
      my += static_cast<double>(tr.visits[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      sxy += (tr.horizons[i] - mx) * (static_cast<double>(tr.visits[i]) - my);
      sxx += (tr.horizons[i] - mx) * (tr.horizons[i] - mx);
    }
    tr.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return tr;
}

nlohmann::json RecurrenceTrend::to_json() const {
  return {{"horizons", horizons}, {"visits", visits}, {"slope", slope}};
}

std::string Observable::name() const {
  if (kind == Kind::total_energy) return "total_energy";
  return "re_u" + std::to_string(component) + to_string(mode);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("KS distance needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {

void require_comparable(const EnsembleSpec& a, const EnsembleSpec& b) {
  a.validate();
  b.validate();
  if (a.lattice->truncation() != b.lattice->truncation()) throw ConfigError("measure compare: lattices differ");
  if (a.forcing.to_json() != b.forcing.to_json()) throw ConfigError("measure compare: forcing configs differ");
  const auto &ia = a.integrator, &ib = b.integrator;
  if (ia.dt != ib.dt || ia.t_end != ib.t_end || ia.scheme != ib.scheme || ia.record_every != ib.record_every ||
      ia.nonlinear != ib.nonlinear)
    throw ConfigError("measure compare: integrator configs differ");
  if (a.n_trajectories != b.n_trajectories) throw ConfigError("measure compare: ensemble sizes differ");
}

std::vector<double> latter_half(const sde::Trajectory& tr, const Observable& obs) {
  std::vector<double> out;
  const double half = 0.5 * tr.times.back();
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    if (tr.times[j] < half) continue;
    if (obs.kind == Observable::Kind::total_energy) {
      out.push_back(tr.energies[j]);
    } else {
      const SpectralState& s = tr.states.at(j);
      out.push_back(s.u_at(obs.mode)[obs.component].real());
    }
  }
  return out;
}

}  // namespace

MeasureReport empirical_measure_compare(const EnsembleSpec& spec_a, const EnsembleSpec& spec_b,
                                        const Observable& observable, std::size_t bootstrap,
                                        std::uint64_t bootstrap_seed) {
  require_comparable(spec_a, spec_b);
  if (observable.kind == Observable::Kind::re_u) {
    spec_a.lattice->locate(observable.mode);
    if (observable.component < 0 || observable.component > 2) throw ConfigError("observable component must be 0..2");
  }
  EnsembleSpec a = spec_a, b = spec_b;
  const bool states = observable.kind != Observable::Kind::total_energy;
  a.integrator.store_states = states;
  b.integrator.store_states = states;
  auto ra = run_ensemble(a);
  auto rb = run_ensemble(b);

  MeasureReport rep;
  rep.horizon = a.integrator.t_end;
  rep.n_pairs = ra.size();
  rep.observable = observable.name();
  rep.config = {{"a", spec_a.to_json()}, {"b", spec_b.to_json()}, {"bootstrap", bootstrap},
                {"bootstrap_seed", bootstrap_seed}};
  for (std::size_t i = 0; i < ra.size(); ++i) {
    auto xa = latter_half(ra[i], observable);
    auto xb = latter_half(rb[i], observable);
    rep.samples_per_run = xa.size();
    rep.ks.push_back(ks_distance(std::move(xa), std::move(xb)));
  }
  auto [m, se] = mean_se(rep.ks);
  rep.mean = m;
  rep.standard_error = se;
  rep.ci_low = rep.ci_high = m;
  if (bootstrap > 0 && rep.ks.size() > 1) {
    std::mt19937_64 rng(bootstrap_seed);
    std::uniform_int_distribution<std::size_t> pick(0, rep.ks.size() - 1);
    std::vector<double> means(bootstrap);
    for (auto& bm : means) {
      double s = 0.0;
      for (std::size_t k = 0; k < rep.ks.size(); ++k) s += rep.ks[pick(rng)];
      bm = s / static_cast<double>(rep.ks.size());
    }
    std::sort(means.begin(), means.end());
    auto q = [&](double p) {
      std::size_t idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(means.size() - 1)));
      return means[idx];
    };
    rep.ci_low = q(0.025);
    rep.ci_high = q(0.975);
  }
  return rep;
}

nlohmann::json MeasureReport::to_json() const {
  return {{"report", "empirical_measure_compare"},
          {"observable", observable},
          {"horizon", horizon},
          {"n_pairs", n_pairs},
          {"samples_per_run", samples_per_run},
          {"ks_mean", mean},
          {"ks_se", standard_error},
          {"ks_ci95", {ci_low, ci_high}},
          {"ks_per_pair", ks},
          {"config", config}};
}

}  // namespace mhd::ergodic
