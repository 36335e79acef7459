#pragma once

#include <map>

#include "mhd/state.hpp"

namespace mhd {

// Constant vector field supported on one mode m of K~:
//   V = v^r . d/dr_m + v^s . d/ds_m + v~^r . d/dr~_m + v~^s . d/ds~_m
struct ConstantVectorField {
  WaveVector mode;
  Vec3 v_r = Vec3::Zero();
  Vec3 v_s = Vec3::Zero();
  Vec3 v_tr = Vec3::Zero();
  Vec3 v_ts = Vec3::Zero();

  ModeComponents components() const { return {v_r, v_s, v_tr, v_ts}; }
  static ConstantVectorField from_components(const WaveVector& m, const ModeComponents& c) {
    return {m, c.r, c.s, c.rt, c.st};
  }

  // max |k . v| over the four blocks, normalized by |k|
  double orthogonality_defect() const;
  void require_orthogonal(double tol = 1e-10) const;  // throws ConstraintError
};

// Lift to a full real state (zero everywhere except the mode). The mode must be
// a representative in the lattice.
RealState embed(const ConstantVectorField& v, const LatticePtr& lattice);

// Constant field with components at several modes of K~.
class BracketResult {
 public:
  using Map = std::map<WaveVector, ModeComponents>;

  void add(const WaveVector& k, const ModeComponents& c) { entries_[k] += c; }
  const Map& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  ModeComponents at(const WaveVector& k) const;
  double max_abs() const;
  // Drop entries that are exactly zero.
  void prune();

  BracketResult& operator+=(const BracketResult& o);
  BracketResult& operator-=(const BracketResult& o);
  friend BracketResult operator+(BracketResult a, const BracketResult& b) { return a += b; }
  friend BracketResult operator-(BracketResult a, const BracketResult& b) { return a -= b; }

  RealState to_real(const LatticePtr& lattice) const;

 private:
  Map entries_;
};

}  // namespace mhd
