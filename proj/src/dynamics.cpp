#include "mhd/dynamics.hpp"

namespace mhd::dynamics {

namespace {

using cd = std::complex<double>;
const cd I(0.0, 1.0);

void require_state(const SpectralState& state, const ModeLattice& lattice) {
  if (state.empty() || state.lattice().truncation() != lattice.truncation())
    throw ValidationError({{Diagnostic::Kind::structural, {}, "state", 0.0, "state lattice does not match"}});
  require_valid(state, lattice, 1e-9);
}

// Raw convolution sums for mode k:
//   su_u = sum (k.U_h) U_l, su_b = sum (k.U_h) B_l
//   sb_b = sum (k.B_h) B_l, sb_u = sum (k.B_h) U_l
struct Sums {
  CVec3 uu = CVec3::Zero();
  CVec3 bb = CVec3::Zero();
  CVec3 ub = CVec3::Zero();
  CVec3 bu = CVec3::Zero();
};

Sums convolve(const SpectralState& s, std::size_t k) {
  const ModeLattice& lat = s.lattice();
  const Vec3& kv = lat.wave(k);
  Sums out;
  for (const Triad& t : lat.triads(k)) {
    CVec3 uh = s.u(t.h), bh = s.b(t.h), ul = s.u(t.l), bl = s.b(t.l);
    if (t.kind == StarSum::difference) {
      ul = ul.conjugate();
      bl = bl.conjugate();
    } else if (t.kind == StarSum::reverse_difference) {
      uh = uh.conjugate();
      bh = bh.conjugate();
    }
    cd ku = kdot(kv, uh);
    cd kb = kdot(kv, bh);
    out.uu += ku * ul;
    out.ub += ku * bl;
    out.bb += kb * bl;
    out.bu += kb * ul;
  }
  return out;
}

}  // namespace

void nonlinear_term(const SpectralState& state, SpectralState& out) {
  const ModeLattice& lat = state.lattice();
  for (std::size_t k = 0; k < lat.size(); ++k) {
    Sums s = convolve(state, k);
    const WaveVector& kv = lat.mode(k);
    out.u(k) = leray_project(kv, CVec3(-I * s.uu + I * s.bb));
    out.b(k) = leray_project(kv, CVec3(-I * s.ub + I * s.bu));
  }
}

DriftOutput drift(const SpectralState& state, const ModeLattice& lattice) {
  require_state(state, lattice);
  SpectralState out(state.lattice_ptr());
  nonlinear_term(state, out);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    out.u(k) -= lattice.norm_sq(k) * state.u(k);
    out.b(k) -= lattice.norm_sq(k) * state.b(k);
  }
  return out;
}

NonlinearBreakdown nonlinear_breakdown(const SpectralState& state, const ModeLattice& lattice) {
  require_state(state, lattice);
  const LatticePtr& lp = state.lattice_ptr();
  NonlinearBreakdown nb{SpectralState(lp), SpectralState(lp), SpectralState(lp), SpectralState(lp)};
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    Sums s = convolve(state, k);
    const WaveVector& kv = lattice.mode(k);
    nb.advection.u(k) = leray_project(kv, CVec3(-I * s.uu));
    nb.lorentz.u(k) = leray_project(kv, CVec3(I * s.bb));
    nb.transport.b(k) = leray_project(kv, CVec3(-I * s.ub));
    nb.stretching.b(k) = leray_project(kv, CVec3(I * s.bu));
  }
  return nb;
}

double energy_production(const SpectralState& state, const ModeLattice& lattice) {
  require_state(state, lattice);
  SpectralState n(state.lattice_ptr());
  nonlinear_term(state, n);
  double p = 0.0;
  for (std::size_t k = 0; k < lattice.size(); ++k)
    p += 2.0 * (state.u(k).dot(n.u(k)).real() + state.b(k).dot(n.b(k)).real());
  return p;
}

RealState real_drift_f0(const RealState& x, const ModeLattice& lattice) {
  if (x.size() != lattice.size()) throw ConfigError("real state does not match lattice");
  RealState f(x.lattice_ptr());
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const WaveVector& kw = lattice.mode(k);
    const Vec3& kv = lattice.wave(k);
    const double k2 = lattice.norm_sq(k);
    ModeComponents acc;
    for (const Triad& t : lattice.triads(k)) {
      const ModeComponents& H = x[t.h];
      const ModeComponents& L = x[t.l];
      const double a = kv.dot(H.r), b = kv.dot(H.s), at = kv.dot(H.rt), bt = kv.dot(H.st);
      const Vec3 Pr = leray_project(kw, L.r), Ps = leray_project(kw, L.s);
      const Vec3 Prt = leray_project(kw, L.rt), Pst = leray_project(kw, L.st);
      switch (t.kind) {
        case StarSum::sum:
          acc.r += (a * Ps + b * Pr) - (at * Pst + bt * Prt);
          acc.s += -(a * Pr - b * Ps) + (at * Prt - bt * Pst);
          acc.rt += (a * L.st + b * L.rt) - (at * L.s + bt * L.r);
          acc.st += -(a * L.rt - b * L.st) + (at * L.r - bt * L.s);
          break;
        case StarSum::difference:
          acc.r += -(a * Ps - b * Pr) + (at * Pst - bt * Prt);
          acc.s += -(a * Pr + b * Ps) + (at * Prt + bt * Pst);
          acc.rt += -(a * L.st - b * L.rt) + (at * L.s - bt * L.r);
          acc.st += -(a * L.rt + b * L.st) + (at * L.r + bt * L.s);
          break;
        case StarSum::reverse_difference:
          acc.r += (a * Ps - b * Pr) - (at * Pst - bt * Prt);
          acc.s += -(a * Pr + b * Ps) + (at * Prt + bt * Pst);
          acc.rt += (a * L.st - b * L.rt) - (at * L.s - bt * L.r);
          acc.st += -(a * L.rt + b * L.st) + (at * L.r + bt * L.s);
          break;
      }
    }
    acc -= k2 * x[k];
    f[k] = acc;
  }
  return f;
}

RealState hessian_bilinear(const ConstantVectorField& v, const ConstantVectorField& w, const LatticePtr& lattice,
                           HessianMethod method, double step) {
  v.require_orthogonal();
  w.require_orthogonal();
  const RealState V = embed(v, lattice);
  const RealState W = embed(w, lattice);
  const ModeLattice& lat = *lattice;
  if (method == HessianMethod::bilinear) {
    // F0 is linear + quadratic, so the polarization identity is exact.
    RealState out = real_drift_f0(V + W, lat);
    out -= real_drift_f0(V, lat);
    out -= real_drift_f0(W, lat);
    return out;
  }
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  auto mixed = [&](double e) {
    RealState pp = real_drift_f0(e * V + e * W, lat);
    RealState pm = real_drift_f0(e * V - e * W, lat);
    RealState mp = real_drift_f0(e * W - e * V, lat);
    RealState mm = real_drift_f0(-e * V - e * W, lat);
    RealState d = pp - pm - mp + mm;
    d *= 1.0 / (4.0 * e * e);
    return d;
  };
  // Richardson extrapolation over steps e and e/2.
  RealState coarse = mixed(step);
  RealState fine = mixed(0.5 * step);
  RealState out = 4.0 * fine - coarse;
  out *= 1.0 / 3.0;
  return out;
}

}  // namespace mhd::dynamics
