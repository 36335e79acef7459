#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mhd/rng.hpp"
#include "mhd/state.hpp"

namespace mhd::noise {

enum class Channel { velocity, magnetic };

using NoiseMatrix = Eigen::Matrix3cd;

// q_u and q_b at one mode of K~; column j multiplies Wiener component j.
struct ForcedMode {
  WaveVector mode;
  NoiseMatrix q_u = NoiseMatrix::Zero();
  NoiseMatrix q_b = NoiseMatrix::Zero();
};

class ForcingConfig {
 public:
  // Modes in -K~ are folded onto K~ by conjugating q.
  void set(const WaveVector& k, Channel channel, const NoiseMatrix& q);
  const std::vector<ForcedMode>& modes() const { return modes_; }
  std::vector<WaveVector> forced_modes() const;
  bool empty() const { return modes_.empty(); }

  // [{"mode": [k1,k2,k3], "channel": "u"|"b", "columns": [[[re,im] x3] x rank]}]
  static ForcingConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<ForcedMode> modes_;
};

// q = amplitude * [e1 e2 0] with e1, e2 an orthonormal basis of k^perp,
// on the requested channels. Each forced channel contributes 2 amplitude^2.
ForcingConfig isotropic_forcing(const std::vector<WaveVector>& modes, double amplitude, bool velocity = true,
                                bool magnetic = true);

// Orthonormal basis of k^perp (deterministic choice).
std::pair<Vec3, Vec3> perp_basis(const WaveVector& k);

struct NoiseIntensity {
  double sigma_u_sq = 0.0;  // sum ||q_u(k)||_F^2
  double sigma_b_sq = 0.0;
  double eps0_u = 0.0;  // sum over K~ of ||q_u(k)||_F^2
  double eps0_b = 0.0;
  double sigma_sq() const { return sigma_u_sq + sigma_b_sq; }
  double eps0() const { return eps0_u + eps0_b; }
};

std::vector<Diagnostic> validate_forcing(const ForcingConfig& config, const ModeLattice& lattice, double tol = 1e-12);
NoiseIntensity intensity(const ForcingConfig& config);

struct ModeIncrement {
  WaveVector mode;
  CVec3 du = CVec3::Zero();
  CVec3 db = CVec3::Zero();
};

// One Gaussian stream per (seed, trajectory, mode, channel).
class NoiseStreams {
 public:
  NoiseStreams(const ForcingConfig& config, std::uint64_t seed, std::uint64_t trajectory);

  // Three standard normals for forced entry `i`, channel `c`.
  Eigen::Vector3d draw(std::size_t i, Channel c);
  std::size_t size() const { return streams_.size() / 2; }

 private:
  struct Stream {
    CounterRng rng;
    std::normal_distribution<double> normal;
  };
  std::vector<Stream> streams_;
};

// q xi sqrt(dt) per forced mode, aligned with config.modes().
std::vector<ModeIncrement> sample_increments(const ForcingConfig& config, double dt, NoiseStreams& streams);

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trajectory, const WaveVector& k, Channel c);

}  // namespace mhd::noise
