#include "mhd/state.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mhd {

SpectralState::SpectralState(LatticePtr lattice)
    : lattice_(std::move(lattice)),
      u_(lattice_->size(), CVec3::Zero()),
      b_(lattice_->size(), CVec3::Zero()) {}

CVec3 SpectralState::u_at(const WaveVector& k) const {
  ModeRef r = lattice_->locate(k);
  return r.conjugated ? CVec3(u_[r.index].conjugate()) : u_[r.index];
}

CVec3 SpectralState::b_at(const WaveVector& k) const {
  ModeRef r = lattice_->locate(k);
  return r.conjugated ? CVec3(b_[r.index].conjugate()) : b_[r.index];
}

void SpectralState::set_mode(const WaveVector& k, const CVec3& u, const CVec3& b) {
  ModeRef r = lattice_->locate(k);
  u_[r.index] = r.conjugated ? CVec3(u.conjugate()) : u;
  b_[r.index] = r.conjugated ? CVec3(b.conjugate()) : b;
}

static void require_same_lattice(const SpectralState& a, const SpectralState& b) {
  if (a.size() != b.size() || (a.size() > 0 && a.lattice().truncation() != b.lattice().truncation()))
    throw ConfigError("states live on different lattices");
}

SpectralState& SpectralState::operator+=(const SpectralState& o) {
  require_same_lattice(*this, o);
  for (std::size_t i = 0; i < u_.size(); ++i) {
    u_[i] += o.u_[i];
    b_[i] += o.b_[i];
  }
  return *this;
}

SpectralState& SpectralState::operator-=(const SpectralState& o) {
  require_same_lattice(*this, o);
  for (std::size_t i = 0; i < u_.size(); ++i) {
    u_[i] -= o.u_[i];
    b_[i] -= o.b_[i];
  }
  return *this;
}

SpectralState& SpectralState::operator*=(double a) {
  for (std::size_t i = 0; i < u_.size(); ++i) {
    u_[i] *= a;
    b_[i] *= a;
  }
  return *this;
}

SpectralState SpectralState::conjugate() const {
  SpectralState out(*this);
  for (std::size_t i = 0; i < u_.size(); ++i) {
    out.u_[i] = u_[i].conjugate();
    out.b_[i] = b_[i].conjugate();
  }
  return out;
}

double energy_u(const SpectralState& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) e += s.u(i).squaredNorm();
  return e;
}

double energy_b(const SpectralState& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) e += s.b(i).squaredNorm();
  return e;
}

double energy(const SpectralState& s) { return energy_u(s) + energy_b(s); }

double dissipation_rate(const SpectralState& s) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    d += s.lattice().norm_sq(i) * (s.u(i).squaredNorm() + s.b(i).squaredNorm());
  return 2.0 * d;
}

double max_abs(const SpectralState& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    m = std::max({m, s.u(i).cwiseAbs().maxCoeff(), s.b(i).cwiseAbs().maxCoeff()});
  return m;
}

void reproject(SpectralState& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const WaveVector& k = s.lattice().mode(i);
    s.u(i) = leray_project(k, s.u(i));
    s.b(i) = leray_project(k, s.b(i));
  }
}

SpectralState random_state(LatticePtr lattice, std::uint64_t seed, double target_energy, int support) {
  if (target_energy < 0.0) throw ConfigError("target energy must be non-negative");
  SpectralState s(lattice);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto draw = [&] {
    CVec3 v;
    for (int c = 0; c < 3; ++c) v[c] = {g(rng), g(rng)};
    return v;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    CVec3 u = draw();
    CVec3 b = draw();
    if (support > 0 && lattice->mode(i).sup_norm() > support) continue;
    s.u(i) = leray_project(lattice->mode(i), u);
    s.b(i) = leray_project(lattice->mode(i), b);
  }
  double e = energy(s);
  if (e > 0.0) s *= std::sqrt(target_energy / e);
  return s;
}

double ModeComponents::max_abs() const {
  return std::max({r.cwiseAbs().maxCoeff(), s.cwiseAbs().maxCoeff(), rt.cwiseAbs().maxCoeff(),
                   st.cwiseAbs().maxCoeff()});
}

ModeComponents& ModeComponents::operator+=(const ModeComponents& o) {
  r += o.r;
  s += o.s;
  rt += o.rt;
  st += o.st;
  return *this;
}

ModeComponents& ModeComponents::operator-=(const ModeComponents& o) {
  r -= o.r;
  s -= o.s;
  rt -= o.rt;
  st -= o.st;
  return *this;
}

ModeComponents& ModeComponents::operator*=(double a) {
  r *= a;
  s *= a;
  rt *= a;
  st *= a;
  return *this;
}

ModeComponents ModeComponents::conjugated() const { return {r, -s, rt, -st}; }

Eigen::Matrix<double, 12, 1> ModeComponents::flat() const {
  Eigen::Matrix<double, 12, 1> x;
  x << r, s, rt, st;
  return x;
}

ModeComponents ModeComponents::from_flat(const Eigen::Matrix<double, 12, 1>& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9)};
}

RealState::RealState(LatticePtr lattice) : lattice_(std::move(lattice)), modes_(lattice_->size()) {}

RealState& RealState::operator+=(const RealState& o) {
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] += o.modes_[i];
  return *this;
}

RealState& RealState::operator-=(const RealState& o) {
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] -= o.modes_[i];
  return *this;
}

RealState& RealState::operator*=(double a) {
  for (auto& m : modes_) m *= a;
  return *this;
}

double RealState::max_abs() const {
  double m = 0.0;
  for (const auto& c : modes_) m = std::max(m, c.max_abs());
  return m;
}

RealState to_real(const SpectralState& s) {
  RealState x(s.lattice_ptr());
  for (std::size_t i = 0; i < s.size(); ++i) {
    x[i].r = s.u(i).real();
    x[i].s = s.u(i).imag();
    x[i].rt = s.b(i).real();
    x[i].st = s.b(i).imag();
  }
  return x;
}

SpectralState to_complex(const RealState& x) {
  SpectralState s(x.lattice_ptr());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      s.u(i)[c] = {x[i].r[c], x[i].s[c]};
      s.b(i)[c] = {x[i].rt[c], x[i].st[c]};
    }
  }
  return s;
}

std::string to_string(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::structural: return "structural";
    case Diagnostic::Kind::divergence: return "divergence";
    case Diagnostic::Kind::non_finite: return "non_finite";
    case Diagnostic::Kind::constraint: return "constraint";
  }
  return "unknown";
}

static std::string summarize(const std::vector<Diagnostic>& d) {
  std::ostringstream os;
  os << d.size() << " violation(s)";
  for (std::size_t i = 0; i < d.size() && i < 5; ++i)
    os << "; " << to_string(d[i].kind) << " at " << to_string(d[i].mode) << " [" << d[i].field << "]: " << d[i].message;
  return os.str();
}

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::vector<Diagnostic> validate(const SpectralState& s, const ModeLattice& lattice, double tol) {
  std::vector<Diagnostic> out;
  if (s.empty()) {
    out.push_back({Diagnostic::Kind::structural, {}, "state", 0.0, "state carries no lattice"});
    return out;
  }
  const ModeLattice& own = s.lattice();
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (!lattice.contains(own.mode(i))) {
      out.push_back({Diagnostic::Kind::structural, own.mode(i), "key", 0.0, "mode outside K_" + std::to_string(lattice.truncation())});
    }
  }
  for (const auto& k : lattice.representatives()) {
    if (!own.contains(k))
      out.push_back({Diagnostic::Kind::structural, k, "key", 0.0, "mode missing from state"});
  }
  for (std::size_t i = 0; i < own.size(); ++i) {
    const WaveVector& k = own.mode(i);
    const Vec3& kv = own.wave(i);
    for (int f = 0; f < 2; ++f) {
      const CVec3& v = f == 0 ? s.u(i) : s.b(i);
      const char* name = f == 0 ? "u" : "b";
      if (!v.allFinite()) {
        out.push_back({Diagnostic::Kind::non_finite, k, name, 0.0, "non-finite coefficient"});
        continue;
      }
      double div = std::abs(kdot(kv, v));
      double scale = std::max(1.0, v.norm());
      if (div > tol * scale)
        out.push_back({Diagnostic::Kind::divergence, k, name, div, "k . coefficient != 0"});
    }
  }
  return out;
}

void require_valid(const SpectralState& s, const ModeLattice& lattice, double tol) {
  auto d = validate(s, lattice, tol);
  if (!d.empty()) throw ValidationError(std::move(d));
}

static nlohmann::json cvec_json(const CVec3& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int c = 0; c < 3; ++c) a.push_back({v[c].real(), v[c].imag()});
  return a;
}

static CVec3 cvec_from_json(const nlohmann::json& a) {
  if (!a.is_array() || a.size() != 3) throw ConfigError("expected three [re, im] pairs");
  CVec3 v;
  for (int c = 0; c < 3; ++c) {
    const auto& p = a.at(c);
    if (!p.is_array() || p.size() != 2) throw ConfigError("expected [re, im] pair");
    v[c] = {p.at(0).get<double>(), p.at(1).get<double>()};
  }
  return v;
}

nlohmann::json state_to_json(const SpectralState& s, double t) {
  nlohmann::json j;
  j["N"] = s.lattice().truncation();
  j["t"] = t;
  nlohmann::json modes = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const WaveVector& k = s.lattice().mode(i);
    modes.push_back({{"k", {k.k1, k.k2, k.k3}}, {"u", cvec_json(s.u(i))}, {"b", cvec_json(s.b(i))}});
  }
  j["modes"] = modes;
  return j;
}

SpectralState state_from_json(const nlohmann::json& j, LatticePtr lattice) {
  SpectralState s(lattice);
  try {
    for (const auto& m : j.at("modes")) {
      const auto& kk = m.at("k");
      WaveVector k{kk.at(0).get<int>(), kk.at(1).get<int>(), kk.at(2).get<int>()};
      if (!lattice->contains(k))
        throw ConfigError("state mode " + to_string(k) + " outside K_" + std::to_string(lattice->truncation()));
      CVec3 u = m.contains("u") ? cvec_from_json(m.at("u")) : CVec3::Zero();
      CVec3 b = m.contains("b") ? cvec_from_json(m.at("b")) : CVec3::Zero();
      s.set_mode(k, u, b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed state JSON: ") + e.what());
  }
  return s;
}

}  // namespace mhd
