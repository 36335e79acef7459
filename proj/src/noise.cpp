#include "mhd/noise.hpp"

#include <algorithm>
#include <cmath>

namespace mhd::noise {

namespace {

const char* channel_name(Channel c) { return c == Channel::velocity ? "u" : "b"; }

}  // namespace

void ForcingConfig::set(const WaveVector& k, Channel channel, const NoiseMatrix& q) {
  if (k.is_zero()) throw ConfigError("cannot force the zero mode");
  WaveVector rep = k;
  NoiseMatrix qq = q;
  if (!is_representative(k)) {
    rep = -k;
    qq = q.conjugate();
  }
  auto it = std::find_if(modes_.begin(), modes_.end(), [&](const ForcedMode& m) { return m.mode == rep; });
  if (it == modes_.end()) {
    ForcedMode fm;
    fm.mode = rep;
    auto pos = std::lower_bound(modes_.begin(), modes_.end(), rep,
                                [](const ForcedMode& m, const WaveVector& v) { return m.mode < v; });
    it = modes_.insert(pos, fm);
  }
  (channel == Channel::velocity ? it->q_u : it->q_b) = qq;
}

std::vector<WaveVector> ForcingConfig::forced_modes() const {
  std::vector<WaveVector> out;
  for (const auto& m : modes_) out.push_back(m.mode);
  return out;
}

ForcingConfig ForcingConfig::from_json(const nlohmann::json& j) {
  ForcingConfig cfg;
  if (!j.is_array()) throw ConfigError("forcing config must be a JSON array");
  std::vector<std::pair<WaveVector, Channel>> seen;
  try {
    for (const auto& e : j) {
      const auto& mk = e.at("mode");
      WaveVector k{mk.at(0).get<int>(), mk.at(1).get<int>(), mk.at(2).get<int>()};
      std::string ch = e.at("channel").get<std::string>();
      Channel c;
      if (ch == "u")
        c = Channel::velocity;
      else if (ch == "b")
        c = Channel::magnetic;
      else
        throw ConfigError("forcing channel must be \"u\" or \"b\", got \"" + ch + "\"");
      WaveVector rep = is_representative(k) ? k : -k;
      for (const auto& [sk, sc] : seen)
        if (sk == rep && sc == c) throw ConfigError("duplicate forcing entry for " + to_string(k) + " channel " + ch);
      seen.push_back({rep, c});
      const auto& cols = e.at("columns");
      if (!cols.is_array() || cols.size() > 3) throw ConfigError("forcing columns: expected at most 3 columns");
      NoiseMatrix q = NoiseMatrix::Zero();
      for (std::size_t col = 0; col < cols.size(); ++col) {
        const auto& v = cols.at(col);
        if (!v.is_array() || v.size() != 3) throw ConfigError("forcing column must have 3 [re, im] entries");
        for (int r = 0; r < 3; ++r) {
          const auto& p = v.at(r);
          if (!p.is_array() || p.size() != 2) throw ConfigError("forcing entry must be [re, im]");
          q(r, static_cast<int>(col)) = {p.at(0).get<double>(), p.at(1).get<double>()};
        }
      }
      cfg.set(k, c, q);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed forcing config: ") + e.what());
  }
  return cfg;
}

nlohmann::json ForcingConfig::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : modes_) {
    for (Channel c : {Channel::velocity, Channel::magnetic}) {
      const NoiseMatrix& q = c == Channel::velocity ? m.q_u : m.q_b;
      if (q.isZero(0.0)) continue;
      int rank = 3;
      while (rank > 0 && q.col(rank - 1).isZero(0.0)) --rank;
      nlohmann::json cols = nlohmann::json::array();
      for (int col = 0; col < rank; ++col) {
        nlohmann::json v = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) v.push_back({q(r, col).real(), q(r, col).imag()});
        cols.push_back(v);
      }
      out.push_back({{"mode", {m.mode.k1, m.mode.k2, m.mode.k3}}, {"channel", channel_name(c)}, {"columns", cols}});
    }
  }
  return out;
}

std::pair<Vec3, Vec3> perp_basis(const WaveVector& k) {
  if (k.is_zero()) throw OutOfLatticeError("no orthogonal plane at k = 0");
  Vec3 kv = k.as_vector().normalized();
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(kv[i]) < std::abs(kv[axis])) axis = i;
  Vec3 a = Vec3::Unit(axis);
  Vec3 e1 = kv.cross(a).normalized();
  Vec3 e2 = kv.cross(e1).normalized();
  return {e1, e2};
}

ForcingConfig isotropic_forcing(const std::vector<WaveVector>& modes, double amplitude, bool velocity, bool magnetic) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("forcing amplitude must be finite and >= 0");
  ForcingConfig cfg;
  for (const auto& k : modes) {
    auto [e1, e2] = perp_basis(k);
    NoiseMatrix q = NoiseMatrix::Zero();
    q.col(0) = (amplitude * e1).cast<std::complex<double>>();
    q.col(1) = (amplitude * e2).cast<std::complex<double>>();
    if (velocity) cfg.set(k, Channel::velocity, q);
    if (magnetic) cfg.set(k, Channel::magnetic, q);
  }
  return cfg;
}

std::vector<Diagnostic> validate_forcing(const ForcingConfig& config, const ModeLattice& lattice, double tol) {
  std::vector<Diagnostic> out;
  for (const auto& m : config.modes()) {
    if (!lattice.contains(m.mode)) {
      out.push_back({Diagnostic::Kind::structural, m.mode, "mode", 0.0,
                     "forced mode outside K_" + std::to_string(lattice.truncation())});
      continue;
    }
    Vec3 kv = m.mode.as_vector();
    for (Channel c : {Channel::velocity, Channel::magnetic}) {
      const NoiseMatrix& q = c == Channel::velocity ? m.q_u : m.q_b;
      if (!q.allFinite()) {
        out.push_back({Diagnostic::Kind::non_finite, m.mode, channel_name(c), 0.0, "non-finite noise entry"});
        continue;
      }
      for (int j = 0; j < 3; ++j) {
        CVec3 col = q.col(j);
        double d = std::abs(kdot(kv, col));
        if (d > tol * std::max(1.0, col.norm()) * kv.norm())
          out.push_back({Diagnostic::Kind::constraint, m.mode, channel_name(c), d,
                         "range of q not orthogonal to k (column " + std::to_string(j) + ")"});
      }
    }
  }
  return out;
}

NoiseIntensity intensity(const ForcingConfig& config) {
  NoiseIntensity n;
  for (const auto& m : config.modes()) {
    n.sigma_u_sq += m.q_u.squaredNorm();
    n.sigma_b_sq += m.q_b.squaredNorm();
  }
  n.eps0_u = n.sigma_u_sq;
  n.eps0_b = n.sigma_b_sq;
  return n;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trajectory, const WaveVector& k, Channel c) {
  std::uint64_t h = hash_combine(seed, trajectory);
  h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(k.k1)));
  h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(k.k2)));
  h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(k.k3)));
  return hash_combine(h, c == Channel::velocity ? 0x75 : 0x62);
}

NoiseStreams::NoiseStreams(const ForcingConfig& config, std::uint64_t seed, std::uint64_t trajectory) {
  for (const auto& m : config.modes()) {
    streams_.push_back({CounterRng(stream_key(seed, trajectory, m.mode, Channel::velocity)), {}});
    streams_.push_back({CounterRng(stream_key(seed, trajectory, m.mode, Channel::magnetic)), {}});
  }
}

Eigen::Vector3d NoiseStreams::draw(std::size_t i, Channel c) {
  Stream& s = streams_.at(2 * i + (c == Channel::velocity ? 0 : 1));
  Eigen::Vector3d xi;
  for (int j = 0; j < 3; ++j) xi[j] = s.normal(s.rng);
  return xi;
}

std::vector<ModeIncrement> sample_increments(const ForcingConfig& config, double dt, NoiseStreams& streams) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (streams.size() != config.modes().size()) throw ConfigError("noise streams do not match forcing config");
  const double sq = std::sqrt(dt);
  std::vector<ModeIncrement> out;
  out.reserve(config.modes().size());
  for (std::size_t i = 0; i < config.modes().size(); ++i) {
    const ForcedMode& m = config.modes()[i];
    ModeIncrement inc;
    inc.mode = m.mode;
    if (!m.q_u.isZero(0.0)) inc.du = m.q_u * (streams.draw(i, Channel::velocity) * sq).cast<std::complex<double>>();
    if (!m.q_b.isZero(0.0)) inc.db = m.q_b * (streams.draw(i, Channel::magnetic) * sq).cast<std::complex<double>>();
    out.push_back(inc);
  }
  return out;
}

}  // namespace mhd::noise
