#include "mhd/vector_field.hpp"

#include <cmath>

namespace mhd {

double ConstantVectorField::orthogonality_defect() const {
  if (mode.is_zero()) throw OutOfLatticeError("constant vector field at k = 0");
  Vec3 k = mode.as_vector();
  double n = k.norm();
  return std::max({std::abs(k.dot(v_r)), std::abs(k.dot(v_s)), std::abs(k.dot(v_tr)), std::abs(k.dot(v_ts))}) / n;
}

void ConstantVectorField::require_orthogonal(double tol) const {
  double scale = std::max(1.0, components().max_abs());
  double d = orthogonality_defect();
  if (d > tol * scale)
    throw ConstraintError("vector field at " + to_string(mode) + " is not orthogonal to its mode (defect " +
                          std::to_string(d) + ")");
}

RealState embed(const ConstantVectorField& v, const LatticePtr& lattice) {
  RealState x(lattice);
  x[lattice->index_of(v.mode)] = v.components();
  return x;
}

ModeComponents BracketResult::at(const WaveVector& k) const {
  auto it = entries_.find(k);
  return it == entries_.end() ? ModeComponents{} : it->second;
}

double BracketResult::max_abs() const {
  double m = 0.0;
  for (const auto& [k, c] : entries_) m = std::max(m, c.max_abs());
  return m;
}

void BracketResult::prune() {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.max_abs() == 0.0)
      it = entries_.erase(it);
    else
      ++it;
  }
}

BracketResult& BracketResult::operator+=(const BracketResult& o) {
  for (const auto& [k, c] : o.entries_) entries_[k] += c;
  return *this;
}

BracketResult& BracketResult::operator-=(const BracketResult& o) {
  for (const auto& [k, c] : o.entries_) entries_[k] -= c;
  return *this;
}

RealState BracketResult::to_real(const LatticePtr& lattice) const {
  RealState x(lattice);
  for (const auto& [k, c] : entries_) x[lattice->index_of(k)] += c;
  return x;
}

}  // namespace mhd
