#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mhd/integrator.hpp"

namespace mhd::ergodic {

using InitSampler = std::function<SpectralState(std::uint64_t trajectory)>;

struct EnsembleSpec {
  LatticePtr lattice;
  std::size_t n_trajectories = 1;
  std::uint64_t base_seed = 0;
  SpectralState init;   // used when no sampler is given
  InitSampler sampler;  // optional per-trajectory initial state
  noise::ForcingConfig forcing;
  sde::IntegratorConfig integrator;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;  // throws ConfigError
  SpectralState initial_state(std::uint64_t trajectory) const;
  nlohmann::json to_json() const;
};

// Trajectory i uses noise streams keyed by (base_seed, i). Order is by index.
std::vector<sde::Trajectory> run_ensemble(const EnsembleSpec& spec);

// Run fn(i) for i in [0, n) on up to `threads` workers; rethrows the first error.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct EnergyAuditReport {
  std::vector<double> times;
  std::vector<double> mean_residual;  // E[energy(t)] + E[D(t)] - E[energy(0)] - sigma^2 t
  std::vector<double> standard_error;
  std::vector<double> bias_allowance;  // dt * int_0^t E[c(s)] ds
  std::vector<bool> within;
  std::size_t n = 0;
  double sigma_sq = 0.0;
  double dt = 0.0;
  bool pass = false;
  nlohmann::json config;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Per-step bias density bound used for the allowance:
//   c = 2 lam^2 E + 3 lam sqrt(E) |N| + |N|^2 + lam sigma^2,  lam = max |k|^2.
double bias_density(double lambda_max, double energy, double nonlinear_power, double sigma_sq);

EnergyAuditReport energy_balance_audit(const EnsembleSpec& spec);
EnergyAuditReport energy_balance_audit(const EnsembleSpec& spec, const std::vector<sde::Trajectory>& runs);

struct MomentBoundReport {
  std::vector<double> times;
  std::vector<double> mean_energy;
  std::vector<double> standard_error;
  double initial_mean = 0.0;
  double sigma_sq = 0.0;
  double bound = 0.0;  // initial_mean + sigma^2 / 2
  std::vector<bool> within;
  std::size_t n = 0;
  bool pass = false;
  nlohmann::json config;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// t_grid values must coincide with recorded times.
MomentBoundReport moment_bound_check(const EnsembleSpec& spec, const std::vector<double>& t_grid);
MomentBoundReport moment_bound_check(const EnsembleSpec& spec, const std::vector<sde::Trajectory>& runs,
                                     const std::vector<double>& t_grid);

// Ornstein-Uhlenbeck stationary mean energy sum ||q_k||^2 / (2 |k|^2).
double ou_stationary_energy(const noise::ForcingConfig& forcing);

struct HittingSample {
  double C = 0.0;
  double tau = 0.0;
  bool censored = false;
};

struct HittingReport {
  double C = 0.0;
  double eps0 = 0.0;
  double delta = 0.0;
  double initial_mean = 0.0;
  double horizon = 0.0;
  std::vector<HittingSample> samples;
  std::vector<double> grid;
  std::vector<double> survival;  // P(tau >= t)
  std::vector<double> standard_error;
  std::vector<double> bound;  // (E[energy(0)]/C^2) exp(-2 delta t)
  std::vector<bool> within;
  std::size_t censored = 0;
  bool pass = false;
  nlohmann::json config;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Horizon is spec.integrator.t_end. Requires C^2 > eps0.
HittingReport hitting_times(const EnsembleSpec& spec, double C, const std::vector<double>& t_grid);

struct RecurrenceCount {
  double h = 0.0;
  double radius = 0.0;
  double horizon = 0.0;
  std::size_t visits = 0;
  std::size_t slots = 0;  // floor(horizon / h)
  std::vector<double> visit_times;
  double mean_gap = 0.0;  // between successive visits, time units
  double max_gap = 0.0;
  double first_visit = -1.0;

  nlohmann::json to_json() const;
};

// Visits at t = n h, n = 1 .. floor(horizon / h), with energy <= radius^2.
// horizon <= 0 means the trajectory end.
RecurrenceCount recurrence_count(const sde::Trajectory& traj, double radius, double h, double horizon = 0.0);

struct RecurrenceTrend {
  std::vector<double> horizons;
  std::vector<std::size_t> visits;
  double slope = 0.0;  // least squares visits vs horizon
  nlohmann::json to_json() const;
};

RecurrenceTrend recurrence_trend(const sde::Trajectory& traj, double radius, double h,
                                 const std::vector<double>& horizons);

struct Observable {
  enum class Kind { total_energy, re_u };
  Kind kind = Kind::total_energy;
  WaveVector mode;  // re_u only
  int component = 0;

  std::string name() const;
};

struct MeasureReport {
  double horizon = 0.0;
  std::size_t n_pairs = 0;
  std::size_t samples_per_run = 0;
  std::vector<double> ks;  // per trajectory pair
  double mean = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string observable;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Pairs trajectory i of spec_a with trajectory i of spec_b and compares the
// latter-half samples of the observable.
MeasureReport empirical_measure_compare(const EnsembleSpec& spec_a, const EnsembleSpec& spec_b,
                                        const Observable& observable = {}, std::size_t bootstrap = 1000,
                                        std::uint64_t bootstrap_seed = 7);

// Mean and standard error of a sample (SE = sd / sqrt(n)).
std::pair<double, double> mean_se(const std::vector<double>& x);

}  // namespace mhd::ergodic
