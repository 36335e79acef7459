#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mhd/noise.hpp"
#include "mhd/state.hpp"

namespace mhd::sde {

enum class Scheme { euler_maruyama, exponential };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::exponential;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  // Drop the quadratic term (linear Ornstein-Uhlenbeck dynamics).
  bool nonlinear = true;
  // Keep full snapshots in the trajectory (energies are always kept).
  bool store_states = true;

  void validate() const;  // throws ConfigError
  std::size_t steps() const;
  nlohmann::json to_json() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralState> states;  // empty unless store_states
  std::vector<double> energies;
  std::vector<double> energies_u;
  std::vector<double> energies_b;
  std::vector<double> dissipation_integral;  // left-endpoint rule, same as the audit
  std::vector<double> nonlinear_power;       // |N(x)|^2 at the recorded state
  SpectralState final_state;

  std::size_t size() const { return times.size(); }
};

class BlowUpError : public Error {
 public:
  BlowUpError(const WaveVector& mode, double time, double energy, std::shared_ptr<Trajectory> partial);
  const WaveVector& mode() const { return mode_; }
  double time() const { return time_; }
  const std::shared_ptr<Trajectory>& partial() const { return partial_; }

 private:
  WaveVector mode_;
  double time_;
  std::shared_ptr<Trajectory> partial_;
};

inline constexpr double kBlowUpEnergy = 1e12;

namespace detail {
struct StepFactors {
  std::vector<std::size_t> forced_index;
  std::vector<double> decay, phi, noise_scale;
};
}  // namespace detail

// Precomputed per-mode factors and noise streams for one trajectory.
class Stepper {
 public:
  Stepper(LatticePtr lattice, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
          std::uint64_t trajectory = 0);

  // Advance by one step; `t` is the time at the start of the step.
  SpectralState step(const SpectralState& state, double t);
  // |N(x)|^2 evaluated during the last step.
  double last_nonlinear_power() const { return last_power_; }
  const IntegratorConfig& config() const { return config_; }
  const ModeLattice& lattice() const { return *lattice_; }

 private:
  LatticePtr lattice_;
  noise::ForcingConfig forcing_;
  IntegratorConfig config_;
  noise::NoiseStreams streams_;
  detail::StepFactors factors_;
  SpectralState work_;
  double last_power_ = 0.0;
};

// Single step with explicit noise streams (convenience wrapper around Stepper logic).
SpectralState step(const SpectralState& state, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
                   noise::NoiseStreams& streams, double t = 0.0);

Trajectory simulate(const SpectralState& init, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
                    const ModeLattice& lattice, std::uint64_t trajectory = 0);

// CSV: t, energy_u, energy_b[, u2_k1_k2_k3, b2_k1_k2_k3 ...]
std::string trajectory_csv(const Trajectory& traj, bool per_mode = false);
nlohmann::json snapshot_json(const SpectralState& state, double t);

}  // namespace mhd::sde
