#include "mhd/hormander.hpp"

#include <algorithm>
#include <set>

#include "mhd/noise.hpp"

namespace mhd::hormander {

namespace {

Vec3 P(const WaveVector& k, const Vec3& x) { return leray_project(k, x); }

// Coefficients at k in K~. A: k = m + n, B: k = m - n, C: k = n - m.
ModeComponents bracket_line(const ConstantVectorField& V, const ConstantVectorField& W, const WaveVector& k, double A,
                            double B, double C) {
  const Vec3 kv = k.as_vector();
  const Vec3 &vr = V.v_r, &vs = V.v_s, &vtr = V.v_tr, &vts = V.v_ts;
  const Vec3 &wr = W.v_r, &ws = W.v_s, &wtr = W.v_tr, &wts = W.v_ts;
  auto sym = [&](const Vec3& a, const Vec3& b) -> Vec3 { return kv.dot(a) * P(k, b) + kv.dot(b) * P(k, a); };
  // x (y.k) - y (x.k)
  auto wedge = [&](const Vec3& x, const Vec3& y) -> Vec3 { return x * kv.dot(y) - y * kv.dot(x); };

  ModeComponents out;
  out.r = (A + B - C) * sym(vs, wr) + (A - B + C) * sym(vr, ws) + (-A - B + C) * sym(vts, wtr) +
          (-A + B - C) * sym(vtr, wts);
  out.s = (-A - B - C) * sym(vr, wr) + (A - B - C) * sym(vs, ws) + (A + B + C) * sym(vtr, wtr) +
          (-A + B + C) * sym(vts, wts);
  out.rt = (A + B - C) * wedge(vts, wr) + (A - B + C) * wedge(vtr, ws) + (A + B - C) * wedge(wtr, vs) +
           (A - B + C) * wedge(wts, vr);
  out.st = (A + B + C) * wedge(wr, vtr) + (A - B - C) * wedge(vts, ws) + (-A - B - C) * wedge(wtr, vr) +
           (A - B - C) * wedge(wts, vs);
  return out;
}

}  // namespace

BracketResult double_bracket(const ConstantVectorField& v, const ConstantVectorField& w, const ModeLattice& lattice) {
  v.require_orthogonal();
  w.require_orthogonal();
  lattice.index_of(v.mode);
  lattice.index_of(w.mode);
  const WaveVector& m = v.mode;
  const WaveVector& n = w.mode;
  BracketResult out;
  const WaveVector candidates[3] = {m + n, m - n, n - m};
  for (int c = 0; c < 3; ++c) {
    const WaveVector& k = candidates[c];
    if (!lattice.contains(k) || !is_representative(k)) continue;
    double A = (k == m + n), B = (k == m - n), C = (k == n - m);
    out.add(k, bracket_line(v, w, k, A, B, C));
  }
  out.prune();
  return out;
}

MixedBrackets mixed_brackets(const WaveVector& m, const Vec3& v, const Vec3& vt, const WaveVector& n, const Vec3& w,
                             const Vec3& wt, const ModeLattice& lattice) {
  ConstantVectorField Vr{m, v, Vec3::Zero(), vt, Vec3::Zero()};
  ConstantVectorField Vs{m, Vec3::Zero(), v, Vec3::Zero(), vt};
  ConstantVectorField Wr{n, w, Vec3::Zero(), wt, Vec3::Zero()};
  ConstantVectorField Ws{n, Vec3::Zero(), w, Vec3::Zero(), wt};
  MixedBrackets out;
  out.rr = double_bracket(Vr, Ws, lattice) + double_bracket(Vs, Wr, lattice);
  out.ss = double_bracket(Vr, Wr, lattice) - double_bracket(Vs, Ws, lattice);
  out.rr.prune();
  out.ss.prune();
  return out;
}

std::string to_string(ClosureMethod m) { return m == ClosureMethod::span ? "span" : "rules"; }

ClosureMethod parse_closure_method(const std::string& name) {
  if (name == "span") return ClosureMethod::span;
  if (name == "rules") return ClosureMethod::rules;
  throw ConfigError("unknown closure method '" + name + "' (expected span or rules)");
}

Eigen::MatrixXd full_mode_basis(const WaveVector& k) {
  auto [e1, e2] = noise::perp_basis(k);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(12, 8);
  for (int blk = 0; blk < 4; ++blk) {
    B.block<3, 1>(3 * blk, 2 * blk) = e1;
    B.block<3, 1>(3 * blk, 2 * blk + 1) = e2;
  }
  return B;
}

namespace {

constexpr double kRankTol = 1e-10;

// Orthonormal basis of the column span.
Eigen::MatrixXd orth(const Eigen::MatrixXd& M) {
  if (M.cols() == 0) return Eigen::MatrixXd(M.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return Eigen::MatrixXd(M.rows(), 0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > kRankTol * sv[0]) ++r;
  return svd.matrixU().leftCols(r);
}

// Columns spanning {c : M c = 0}; M has orthonormal-scale entries.
Eigen::MatrixXd kernel(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.cols();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] > kRankTol) ++r;
  return svd.matrixV().rightCols(n - r);
}

std::vector<WaveVector> fold_forced(const std::vector<WaveVector>& forced, const ModeLattice& lattice) {
  std::set<WaveVector> reps;
  for (const auto& k : forced) {
    if (!lattice.contains(k))
      throw ConfigError("forced mode " + to_string(k) + " outside K_" + std::to_string(lattice.truncation()));
    reps.insert(canonical(k, lattice).representative);
  }
  return {reps.begin(), reps.end()};
}

void finish(ClosureReport& rep, const ModeLattice& lattice) {
  rep.A_of_N.clear();
  bool all = lattice.size() > 0;
  for (const auto& k : lattice.representatives()) {
    if (rep.attained[k] == 8) {
      rep.A_of_N.push_back(k);
      rep.A_of_N.push_back(-k);
    } else {
      all = false;
    }
  }
  std::sort(rep.A_of_N.begin(), rep.A_of_N.end());
  rep.hypoelliptic = all;
}

ClosureReport span_closure(const std::vector<WaveVector>& forced, const ModeLattice& lattice) {
  const std::size_t D = lattice.size();
  std::vector<Eigen::MatrixXd> basis(D, Eigen::MatrixXd(12, 0));
  for (const auto& k : forced) basis[lattice.index_of(k)] = full_mode_basis(k);

  auto field = [&](std::size_t i, const Eigen::VectorXd& x) {
    return ConstantVectorField::from_components(lattice.mode(i), ModeComponents::from_flat(x));
  };

  int passes = 0;
  bool changed = true;
  const int max_passes = static_cast<int>(8 * D + 2);
  while (changed && passes < max_passes) {
    changed = false;
    ++passes;
    for (std::size_t i = 0; i < D; ++i) {
      for (std::size_t j = i; j < D; ++j) {
        if (basis[i].cols() == 0 || basis[j].cols() == 0) continue;
        const WaveVector& m = lattice.mode(i);
        const WaveVector& n = lattice.mode(j);
        // Targets in K~: m + n and the representative of n - m.
        std::vector<std::size_t> targets;
        if (lattice.contains(m + n)) targets.push_back(lattice.index_of(m + n));
        if (i != j && lattice.contains(n - m)) targets.push_back(lattice.locate(n - m).index);
        if (targets.empty()) continue;
        bool all_full = true;
        for (auto t : targets) all_full = all_full && basis[t].cols() == 8;
        if (all_full) continue;

        const Eigen::Index rows = 12 * static_cast<Eigen::Index>(targets.size());
        std::vector<Eigen::VectorXd> cols;
        for (Eigen::Index a = 0; a < basis[i].cols(); ++a) {
          ConstantVectorField V = field(i, basis[i].col(a));
          for (Eigen::Index b = 0; b < basis[j].cols(); ++b) {
            ConstantVectorField W = field(j, basis[j].col(b));
            BracketResult br = double_bracket(V, W, lattice);
            Eigen::VectorXd x = Eigen::VectorXd::Zero(rows);
            for (std::size_t t = 0; t < targets.size(); ++t)
              x.segment<12>(12 * static_cast<Eigen::Index>(t)) = br.at(lattice.mode(targets[t])).flat();
            cols.push_back(x);
          }
        }
        for (std::size_t t = 0; t < targets.size(); ++t) {
          const auto& Bt = basis[targets[t]];
          for (Eigen::Index c = 0; c < Bt.cols(); ++c) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(rows);
            x.segment<12>(12 * static_cast<Eigen::Index>(t)) = Bt.col(c);
            cols.push_back(x);
          }
        }
        Eigen::MatrixXd M(rows, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) M.col(static_cast<Eigen::Index>(c)) = cols[c];
        Eigen::MatrixXd Q = orth(M);

        for (std::size_t t = 0; t < targets.size(); ++t) {
          Eigen::MatrixXd top = Q.middleRows(12 * static_cast<Eigen::Index>(t), 12);
          Eigen::MatrixXd pure;
          if (targets.size() == 1) {
            pure = top;
          } else {
            Eigen::MatrixXd other = Q.middleRows(12 * static_cast<Eigen::Index>(1 - t), 12);
            pure = top * kernel(other);
          }
          Eigen::MatrixXd nb = orth(pure);
          if (nb.cols() > basis[targets[t]].cols()) {
            basis[targets[t]] = nb;
            changed = true;
          }
        }
      }
    }
  }

  ClosureReport rep;
  rep.method = ClosureMethod::span;
  rep.N = lattice.truncation();
  rep.forced = forced;
  for (std::size_t i = 0; i < D; ++i) rep.attained[lattice.mode(i)] = static_cast<int>(basis[i].cols());
  rep.iterations = passes;
  finish(rep, lattice);
  return rep;
}

bool independent(const WaveVector& a, const WaveVector& b) {
  return !a.as_vector().cross(b.as_vector()).isZero(0.0);
}

ClosureReport rules_closure(const std::vector<WaveVector>& forced, const ModeLattice& lattice) {
  std::set<WaveVector> full(forced.begin(), forced.end());
  std::set<WaveVector> provisional;
  int passes = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++passes;
    std::vector<WaveVector> cur(full.begin(), full.end());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t j = i; j < cur.size(); ++j) {
        const WaveVector& m = cur[i];
        for (int sign : {1, -1}) {
          WaveVector n = sign > 0 ? cur[j] : -cur[j];
          WaveVector k = m + n;
          if (!lattice.contains(k) || !independent(m, n)) continue;
          WaveVector rep = canonical(k, lattice).representative;
          if (full.count(rep)) continue;
          if (m.norm_sq() != n.norm_sq()) {
            full.insert(rep);
            provisional.erase(rep);
            changed = true;
          } else if (provisional.insert(rep).second) {
            changed = true;
          }
        }
      }
    }
  }
  ClosureReport rep;
  rep.method = ClosureMethod::rules;
  rep.N = lattice.truncation();
  rep.forced = forced;
  for (const auto& k : lattice.representatives())
    rep.attained[k] = full.count(k) ? 8 : (provisional.count(k) ? 4 : 0);
  rep.provisional.assign(provisional.begin(), provisional.end());
  rep.iterations = passes;
  finish(rep, lattice);
  return rep;
}

nlohmann::json modes_json(const std::vector<WaveVector>& ks) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& k : ks) a.push_back({k.k1, k.k2, k.k3});
  return a;
}

}  // namespace

ClosureReport closure(const std::vector<WaveVector>& forced, const ModeLattice& lattice, ClosureMethod method) {
  auto reps = fold_forced(forced, lattice);
  return method == ClosureMethod::span ? span_closure(reps, lattice) : rules_closure(reps, lattice);
}

ClosureReport verdict(const std::vector<WaveVector>& forced, const ModeLattice& lattice) {
  return closure(forced, lattice, ClosureMethod::span);
}

nlohmann::json ClosureReport::to_json() const {
  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [k, d] : attained) dims[to_string(k)] = d;
  nlohmann::json j{{"forced", modes_json(forced)}, {"N", N},
                   {"per_mode_dim", dims},         {"A", modes_json(A_of_N)},
                   {"hypoelliptic", hypoelliptic}, {"iterations", iterations},
                   {"method", to_string(method)}};
  if (method == ClosureMethod::rules) j["provisional"] = modes_json(provisional);
  return j;
}

}  // namespace mhd::hormander
