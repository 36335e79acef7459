#include "mhd/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "mhd/error.hpp"

namespace mhd {

int WaveVector::sup_norm() const {
  return std::max({std::abs(k1), std::abs(k2), std::abs(k3)});
}

std::string to_string(const WaveVector& k) {
  std::ostringstream os;
  os << '(' << k.k1 << ',' << k.k2 << ',' << k.k3 << ')';
  return os.str();
}

WaveVector parse_wave_vector(std::string_view text) {
  std::string cleaned;
  for (char c : text) {
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',')
      cleaned.push_back(' ');
    else
      cleaned.push_back(c);
  }
  std::istringstream is(cleaned);
  WaveVector k;
  std::string rest;
  if (!(is >> k.k1 >> k.k2 >> k.k3) || (is >> rest))
    throw ConfigError("cannot parse wavevector '" + std::string(text) + "'");
  return k;
}

std::vector<WaveVector> parse_mode_list(std::string_view text) {
  std::vector<WaveVector> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find('(', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = text.find(')', open);
    if (close == std::string_view::npos)
      throw ConfigError("unbalanced parenthesis in mode list '" + std::string(text) + "'");
    out.push_back(parse_wave_vector(text.substr(open, close - open + 1)));
    pos = close + 1;
  }
  bool has_digits = std::any_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  if (out.empty() && has_digits) out.push_back(parse_wave_vector(text));
  return out;
}

int representative_component(const WaveVector& k) {
  if (k.k3 > 0) return 1;
  if (k.k3 == 0 && k.k2 > 0) return 2;
  if (k.k3 == 0 && k.k2 == 0 && k.k1 > 0) return 3;
  return 0;
}

ModeLattice::ModeLattice(int N) : n_(N) {
  if (N < 1) throw ConfigError("truncation N must be >= 1, got " + std::to_string(N));
  if (N > 16) throw ConfigError("truncation N = " + std::to_string(N) + " is too large");

  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      for (int c = -N; c <= N; ++c) {
        WaveVector k{a, b, c};
        if (is_representative(k)) reps_.push_back(k);
      }
  std::sort(reps_.begin(), reps_.end());

  const std::size_t side = 2 * static_cast<std::size_t>(N) + 1;
  slot_.assign(side * side * side, -1);
  for (std::size_t i = 0; i < reps_.size(); ++i) {
    slot_[cube_slot(reps_[i])] = static_cast<long>(2 * i);
    slot_[cube_slot(-reps_[i])] = static_cast<long>(2 * i + 1);
    waves_.push_back(reps_[i].as_vector());
    norms_.push_back(reps_[i].norm_sq());
  }

  triads_.resize(reps_.size());
  for (std::size_t k = 0; k < reps_.size(); ++k) {
    for (std::size_t h = 0; h < reps_.size(); ++h) {
      const WaveVector& kv = reps_[k];
      const WaveVector& hv = reps_[h];
      auto add = [&](const WaveVector& l, StarSum kind) {
        auto ref = find(l);
        if (ref && !ref->conjugated) triads_[k].push_back({h, ref->index, kind});
      };
      add(kv - hv, StarSum::sum);
      add(hv - kv, StarSum::difference);
      add(kv + hv, StarSum::reverse_difference);
    }
  }
}

std::size_t ModeLattice::cube_slot(const WaveVector& k) const {
  const std::size_t side = 2 * static_cast<std::size_t>(n_) + 1;
  return (static_cast<std::size_t>(k.k1 + n_) * side + static_cast<std::size_t>(k.k2 + n_)) * side +
         static_cast<std::size_t>(k.k3 + n_);
}

bool ModeLattice::contains(const WaveVector& k) const {
  return !k.is_zero() && k.sup_norm() <= n_;
}

std::optional<ModeRef> ModeLattice::find(const WaveVector& k) const {
  if (!contains(k)) return std::nullopt;
  long s = slot_[cube_slot(k)];
  return ModeRef{static_cast<std::size_t>(s / 2), (s % 2) == 1};
}

ModeRef ModeLattice::locate(const WaveVector& k) const {
  auto ref = find(k);
  if (!ref)
    throw OutOfLatticeError("mode " + to_string(k) + " is not in K_" + std::to_string(n_));
  return *ref;
}

std::size_t ModeLattice::index_of(const WaveVector& k) const {
  ModeRef ref = locate(k);
  if (ref.conjugated)
    throw OutOfLatticeError("mode " + to_string(k) + " is not a representative");
  return ref.index;
}

std::vector<WaveVector> ModeLattice::full_set() const {
  std::vector<WaveVector> out;
  out.reserve(full_size());
  for (const auto& k : reps_) {
    out.push_back(k);
    out.push_back(-k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ModeLattice::component_count(int which) const {
  return static_cast<std::size_t>(std::count_if(
      reps_.begin(), reps_.end(), [which](const WaveVector& k) { return representative_component(k) == which; }));
}

std::size_t ModeLattice::triad_count() const {
  std::size_t n = 0;
  for (const auto& t : triads_) n += t.size();
  return n;
}

LatticePtr build_lattice(int N) { return std::make_shared<const ModeLattice>(N); }

CanonicalMode canonical(const WaveVector& k, const ModeLattice& lattice) {
  ModeRef ref = lattice.locate(k);
  return {lattice.mode(ref.index), ref.conjugated};
}

CVec3 leray_project(const WaveVector& k, const CVec3& theta) {
  if (k.is_zero()) throw OutOfLatticeError("Leray projection undefined at k = 0");
  Vec3 kv = k.as_vector();
  std::complex<double> c = kdot(kv, theta) / static_cast<double>(k.norm_sq());
  return theta - c * kv.cast<std::complex<double>>();
}

Vec3 leray_project(const WaveVector& k, const Vec3& theta) {
  if (k.is_zero()) throw OutOfLatticeError("Leray projection undefined at k = 0");
  Vec3 kv = k.as_vector();
  return theta - (kv.dot(theta) / k.norm_sq()) * kv;
}

}  // namespace mhd
