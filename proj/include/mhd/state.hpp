#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhd/error.hpp"
#include "mhd/lattice.hpp"
#include <json.hpp>

namespace mhd {

// Coefficients (u_k, b_k) for k in K~; the -K~ half is implied by
// u_{-k} = conj(u_k). A default-constructed state is empty (no lattice).
class SpectralState {
 public:
  SpectralState() = default;
  explicit SpectralState(LatticePtr lattice);

  bool empty() const { return lattice_ == nullptr; }
  const ModeLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  std::size_t size() const { return u_.size(); }

  CVec3& u(std::size_t i) { return u_[i]; }
  const CVec3& u(std::size_t i) const { return u_[i]; }
  CVec3& b(std::size_t i) { return b_[i]; }
  const CVec3& b(std::size_t i) const { return b_[i]; }

  // Either half of K_N; the -K~ half returns the conjugate.
  CVec3 u_at(const WaveVector& k) const;
  CVec3 b_at(const WaveVector& k) const;
  void set_mode(const WaveVector& k, const CVec3& u, const CVec3& b);

  SpectralState& operator+=(const SpectralState& o);
  SpectralState& operator-=(const SpectralState& o);
  SpectralState& operator*=(double a);
  friend SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }
  friend SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
  friend SpectralState operator*(double a, SpectralState s) { return s *= a; }

  SpectralState conjugate() const;

 private:
  LatticePtr lattice_;
  std::vector<CVec3> u_;
  std::vector<CVec3> b_;
};

double energy(const SpectralState& s);
double energy_u(const SpectralState& s);
double energy_b(const SpectralState& s);
// 2 sum |k|^2 (|u_k|^2 + |b_k|^2)
double dissipation_rate(const SpectralState& s);
// Largest |c| over all coefficients.
double max_abs(const SpectralState& s);

// Apply the Leray projection to every u_k and b_k.
void reproject(SpectralState& s);

// Divergence-free Gaussian state rescaled to the given energy, supported on
// modes with |k|_inf <= support (0 means the whole lattice).
SpectralState random_state(LatticePtr lattice, std::uint64_t seed, double target_energy, int support = 0);

struct ModeComponents {
  Vec3 r = Vec3::Zero();
  Vec3 s = Vec3::Zero();
  Vec3 rt = Vec3::Zero();
  Vec3 st = Vec3::Zero();

  double max_abs() const;
  ModeComponents& operator+=(const ModeComponents& o);
  ModeComponents& operator-=(const ModeComponents& o);
  ModeComponents& operator*=(double a);
  friend ModeComponents operator+(ModeComponents a, const ModeComponents& b) { return a += b; }
  friend ModeComponents operator-(ModeComponents a, const ModeComponents& b) { return a -= b; }
  friend ModeComponents operator*(double a, ModeComponents m) { return m *= a; }
  // Conjugation seen in real coordinates: s and s~ change sign.
  ModeComponents conjugated() const;
  Eigen::Matrix<double, 12, 1> flat() const;
  static ModeComponents from_flat(const Eigen::Matrix<double, 12, 1>& x);
};

// u_k = r_k + i s_k, b_k = r~_k + i s~_k for k in K~.
class RealState {
 public:
  RealState() = default;
  explicit RealState(LatticePtr lattice);

  const ModeLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  std::size_t size() const { return modes_.size(); }
  ModeComponents& operator[](std::size_t i) { return modes_[i]; }
  const ModeComponents& operator[](std::size_t i) const { return modes_[i]; }

  RealState& operator+=(const RealState& o);
  RealState& operator-=(const RealState& o);
  RealState& operator*=(double a);
  friend RealState operator+(RealState a, const RealState& b) { return a += b; }
  friend RealState operator-(RealState a, const RealState& b) { return a -= b; }
  friend RealState operator*(double a, RealState s) { return s *= a; }

  double max_abs() const;

 private:
  LatticePtr lattice_;
  std::vector<ModeComponents> modes_;
};

RealState to_real(const SpectralState& s);
SpectralState to_complex(const RealState& x);

struct Diagnostic {
  enum class Kind { structural, divergence, non_finite, constraint };
  Kind kind = Kind::structural;
  WaveVector mode;
  std::string field;
  double magnitude = 0.0;
  std::string message;
};

std::string to_string(Diagnostic::Kind kind);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Empty result means valid. Divergence is flagged when |k . u_k| > tol * max(1, |u_k|).
std::vector<Diagnostic> validate(const SpectralState& s, const ModeLattice& lattice, double tol = 1e-12);
void require_valid(const SpectralState& s, const ModeLattice& lattice, double tol = 1e-12);

nlohmann::json state_to_json(const SpectralState& s, double t);
SpectralState state_from_json(const nlohmann::json& j, LatticePtr lattice);

}  // namespace mhd
