#include "mhd/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mhd/dynamics.hpp"

namespace mhd::sde {

std::string to_string(Scheme s) { return s == Scheme::exponential ? "exponential" : "euler_maruyama"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential" || name == "exp") return Scheme::exponential;
  if (name == "euler_maruyama" || name == "em" || name == "euler-maruyama") return Scheme::euler_maruyama;
  throw ConfigError("unknown scheme '" + name + "' (expected exponential or euler_maruyama)");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and >= dt");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
  double n = t_end / dt;
  if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n))
    throw ConfigError("t_end must be an integer multiple of dt");
}

std::size_t IntegratorConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

nlohmann::json IntegratorConfig::to_json() const {
  return {{"scheme", to_string(scheme)}, {"dt", dt},         {"t_end", t_end},
          {"record_every", record_every}, {"seed", seed}, {"nonlinear", nonlinear}};
}

static std::string blow_up_message(const WaveVector& k, double t, double e) {
  std::ostringstream os;
  os << "blow-up at t = " << t << " (energy " << e << ") in mode " << to_string(k);
  return os.str();
}

BlowUpError::BlowUpError(const WaveVector& mode, double time, double energy, std::shared_ptr<Trajectory> partial)
    : Error(blow_up_message(mode, time, energy)), mode_(mode), time_(time), partial_(std::move(partial)) {}

namespace {

using Factors = detail::StepFactors;

Factors make_factors(const ModeLattice& lat, const noise::ForcingConfig& forcing, const IntegratorConfig& cfg) {
  Factors f;
  for (const auto& m : forcing.modes()) f.forced_index.push_back(lat.index_of(m.mode));
  const double dt = cfg.dt;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double lam = lat.norm_sq(i);
    if (cfg.scheme == Scheme::exponential) {
      f.decay.push_back(std::exp(-lam * dt));
      f.phi.push_back(-std::expm1(-lam * dt) / lam);
      f.noise_scale.push_back(std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam * dt)));
    } else {
      f.decay.push_back(1.0 - lam * dt);
      f.phi.push_back(dt);
      f.noise_scale.push_back(1.0);
    }
  }
  return f;
}

void check_forcing(const noise::ForcingConfig& forcing, const ModeLattice& lattice) {
  auto d = noise::validate_forcing(forcing, lattice, 1e-10);
  if (!d.empty()) throw ValidationError(std::move(d));
}

// Returns |N(x)|^2.
double advance(const SpectralState& x, SpectralState& out, SpectralState& work, const Factors& f,
               const noise::ForcingConfig& forcing, const IntegratorConfig& cfg, noise::NoiseStreams& streams) {
  const ModeLattice& lat = x.lattice();
  double power = 0.0;
  if (cfg.nonlinear) {
    dynamics::nonlinear_term(x, work);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      power += work.u(i).squaredNorm() + work.b(i).squaredNorm();
      out.u(i) = f.decay[i] * x.u(i) + f.phi[i] * work.u(i);
      out.b(i) = f.decay[i] * x.b(i) + f.phi[i] * work.b(i);
    }
  } else {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      out.u(i) = f.decay[i] * x.u(i);
      out.b(i) = f.decay[i] * x.b(i);
    }
  }
  if (!forcing.empty()) {
    auto inc = noise::sample_increments(forcing, cfg.dt, streams);
    for (std::size_t j = 0; j < inc.size(); ++j) {
      std::size_t i = f.forced_index[j];
      out.u(i) += f.noise_scale[i] * inc[j].du;
      out.b(i) += f.noise_scale[i] * inc[j].db;
    }
  }
  reproject(out);
  return power;
}

void check_blow_up(const SpectralState& s, double t, const std::shared_ptr<Trajectory>& partial) {
  double e = energy(s);
  if (std::isfinite(e) && e <= kBlowUpEnergy) return;
  std::size_t worst = 0;
  double worst_mag = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double m = s.u(i).squaredNorm() + s.b(i).squaredNorm();
    if (!std::isfinite(m)) {
      worst = i;
      break;
    }
    if (m > worst_mag) {
      worst_mag = m;
      worst = i;
    }
  }
  throw BlowUpError(s.lattice().mode(worst), t, e, partial);
}

}  // namespace

Stepper::Stepper(LatticePtr lattice, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
                 std::uint64_t trajectory)
    : lattice_(std::move(lattice)),
      forcing_(forcing),
      config_(config),
      streams_(forcing, config.seed, trajectory),
      work_(lattice_) {
  config_.validate();
  check_forcing(forcing_, *lattice_);
  factors_ = make_factors(*lattice_, forcing_, config_);
}

SpectralState Stepper::step(const SpectralState& state, double t) {
  if (state.empty() || state.lattice().truncation() != lattice_->truncation())
    throw ValidationError({{Diagnostic::Kind::structural, {}, "state", 0.0, "state lattice does not match stepper"}});
  SpectralState out(lattice_);
  last_power_ = advance(state, out, work_, factors_, forcing_, config_, streams_);
  check_blow_up(out, t + config_.dt, nullptr);
  return out;
}

SpectralState step(const SpectralState& state, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
                   noise::NoiseStreams& streams, double t) {
  config.validate();
  require_valid(state, state.lattice(), 1e-9);
  check_forcing(forcing, state.lattice());
  Factors f = make_factors(state.lattice(), forcing, config);
  SpectralState out(state.lattice_ptr());
  SpectralState work(state.lattice_ptr());
  advance(state, out, work, f, forcing, config, streams);
  check_blow_up(out, t + config.dt, nullptr);
  return out;
}

Trajectory simulate(const SpectralState& init, const noise::ForcingConfig& forcing, const IntegratorConfig& config,
                    const ModeLattice& lattice, std::uint64_t trajectory) {
  config.validate();
  require_valid(init, lattice, 1e-9);
  if (init.lattice().truncation() != lattice.truncation())
    throw ValidationError({{Diagnostic::Kind::structural, {}, "state", 0.0, "initial state lattice mismatch"}});
  check_forcing(forcing, lattice);

  const LatticePtr& lp = init.lattice_ptr();
  Factors f = make_factors(lattice, forcing, config);
  noise::NoiseStreams streams(forcing, config.seed, trajectory);
  SpectralState x = init;
  SpectralState next(lp), work(lp);
  auto traj = std::make_shared<Trajectory>();
  const std::size_t steps = config.steps();
  double dissipation = 0.0;

  auto record = [&](std::size_t n, const SpectralState& s, double power) {
    double eu = energy_u(s), eb = energy_b(s);
    traj->times.push_back(static_cast<double>(n) * config.dt);
    traj->energies_u.push_back(eu);
    traj->energies_b.push_back(eb);
    traj->energies.push_back(eu + eb);
    traj->dissipation_integral.push_back(dissipation);
    traj->nonlinear_power.push_back(power);
    if (config.store_states) traj->states.push_back(s);
  };

  for (std::size_t n = 0; n < steps; ++n) {
    const double rate = dissipation_rate(x);
    const double power = advance(x, next, work, f, forcing, config, streams);
    if (n % config.record_every == 0) record(n, x, power);
    dissipation += rate * config.dt;
    check_blow_up(next, static_cast<double>(n + 1) * config.dt, traj);
    std::swap(x, next);
  }
  double final_power = 0.0;
  if (config.nonlinear) {
    dynamics::nonlinear_term(x, work);
    for (std::size_t i = 0; i < x.size(); ++i) final_power += work.u(i).squaredNorm() + work.b(i).squaredNorm();
  }
  record(steps, x, final_power);
  traj->final_state = x;
  return std::move(*traj);
}

static std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj, bool per_mode) {
  if (per_mode && traj.states.size() != traj.times.size())
    throw ConfigError("per-mode CSV needs stored states");
  std::ostringstream os;
  os << "t,energy_u,energy_b";
  const ModeLattice* lat = per_mode && !traj.states.empty() ? &traj.states.front().lattice() : nullptr;
  if (lat) {
    for (const auto& k : lat->representatives()) {
      std::string tag = std::to_string(k.k1) + "_" + std::to_string(k.k2) + "_" + std::to_string(k.k3);
      os << ",u2_" << tag << ",b2_" << tag;
    }
  }
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << fmt(traj.times[i]) << ',' << fmt(traj.energies_u[i]) << ',' << fmt(traj.energies_b[i]);
    if (lat) {
      const SpectralState& s = traj.states[i];
      for (std::size_t j = 0; j < s.size(); ++j) os << ',' << fmt(s.u(j).squaredNorm()) << ',' << fmt(s.b(j).squaredNorm());
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json snapshot_json(const SpectralState& state, double t) { return state_to_json(state, t); }

}  // namespace mhd::sde
