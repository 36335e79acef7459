#pragma once

#include <Eigen/Dense>
#include <compare>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mhd {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

struct WaveVector {
  int k1 = 0;
  int k2 = 0;
  int k3 = 0;

  // Lexicographic on (k1, k2, k3).
  friend constexpr auto operator<=>(const WaveVector&, const WaveVector&) = default;

  constexpr WaveVector operator-() const { return {-k1, -k2, -k3}; }
  friend constexpr WaveVector operator+(const WaveVector& a, const WaveVector& b) {
    return {a.k1 + b.k1, a.k2 + b.k2, a.k3 + b.k3};
  }
  friend constexpr WaveVector operator-(const WaveVector& a, const WaveVector& b) {
    return {a.k1 - b.k1, a.k2 - b.k2, a.k3 - b.k3};
  }

  constexpr bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0; }
  constexpr int norm_sq() const { return k1 * k1 + k2 * k2 + k3 * k3; }
  int sup_norm() const;
  Vec3 as_vector() const { return Vec3(k1, k2, k3); }
};

std::string to_string(const WaveVector& k);

// Accepts "(1,0,-1)", "1,0,-1" or "1 0 -1".
WaveVector parse_wave_vector(std::string_view text);

// Accepts "(1,0,0),(0,1,0)" or "(1,0,0);(0,1,0)".
std::vector<WaveVector> parse_mode_list(std::string_view text);

// Which piece of the representative half K~ = K^1 u K^2 u K^3 contains k;
// 0 when k lies in -K~ or is zero. Independent of the truncation.
int representative_component(const WaveVector& k);
inline bool is_representative(const WaveVector& k) { return representative_component(k) != 0; }

// Position of a mode of K_N in the stored K~ array. `conjugated` means the
// mode itself is -K~[index], so its coefficient is the conjugate.
struct ModeRef {
  std::size_t index = 0;
  bool conjugated = false;
};

struct CanonicalMode {
  WaveVector representative;
  bool conjugated = false;
};

// Three ways a pair (h, l) of K~ feeds the convolution at k:
//   sum:                h + l = k, coefficients u_h, u_l
//   difference:         h - l = k, coefficients u_h, conj(u_l)
//   reverse_difference: l - h = k, coefficients conj(u_h), u_l
enum class StarSum { sum, difference, reverse_difference };

struct Triad {
  std::size_t h = 0;
  std::size_t l = 0;
  StarSum kind = StarSum::sum;
};

class ModeLattice {
 public:
  explicit ModeLattice(int N);

  int truncation() const { return n_; }
  std::size_t size() const { return reps_.size(); }
  std::size_t full_size() const { return 2 * reps_.size(); }
  const std::vector<WaveVector>& representatives() const { return reps_; }
  const WaveVector& mode(std::size_t i) const { return reps_[i]; }
  const Vec3& wave(std::size_t i) const { return waves_[i]; }
  double norm_sq(std::size_t i) const { return norms_[i]; }

  bool contains(const WaveVector& k) const;
  std::optional<ModeRef> find(const WaveVector& k) const;
  ModeRef locate(const WaveVector& k) const;  // throws OutOfLatticeError
  std::size_t index_of(const WaveVector& k) const;  // representative only, else throws

  std::vector<WaveVector> full_set() const;
  std::size_t component_count(int which) const;

  // Convolution pairs over all of K_N whose sum is mode(k), expressed
  // through K~ indices.
  const std::vector<Triad>& triads(std::size_t k) const { return triads_[k]; }
  std::size_t triad_count() const;

 private:
  std::size_t cube_slot(const WaveVector& k) const;

  int n_;
  std::vector<WaveVector> reps_;
  std::vector<Vec3> waves_;
  std::vector<double> norms_;
  std::vector<long> slot_;  // cube cell -> 2*index + conjugated, -1 if absent
  std::vector<std::vector<Triad>> triads_;
};

using LatticePtr = std::shared_ptr<const ModeLattice>;

LatticePtr build_lattice(int N);

CanonicalMode canonical(const WaveVector& k, const ModeLattice& lattice);

// Leray projection onto k^perp. Throws OutOfLatticeError for k = 0.
CVec3 leray_project(const WaveVector& k, const CVec3& theta);
Vec3 leray_project(const WaveVector& k, const Vec3& theta);

inline std::complex<double> kdot(const Vec3& k, const CVec3& v) {
  return k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
}

}  // namespace mhd
