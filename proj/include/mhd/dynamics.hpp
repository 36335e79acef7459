#pragma once

#include "mhd/state.hpp"
#include "mhd/vector_field.hpp"

namespace mhd::dynamics {

// Tangent vectors share the state representation.
using DriftOutput = SpectralState;

// Nonlinear drift split by origin (each part Leray-projected per mode):
//   advection   = -i sum (k.u_h) P_k u_l
//   lorentz     = +i sum (k.b_h) P_k b_l
//   transport   = P_k(-i sum (k.u_h) b_l)
//   stretching  = P_k(+i sum (k.b_h) u_l)
// Velocity nonlinearity is advection + lorentz; magnetic is transport + stretching.
struct NonlinearBreakdown {
  SpectralState advection;
  SpectralState lorentz;
  SpectralState transport;
  SpectralState stretching;
};

// Deterministic drift with nu = eta = 1.
DriftOutput drift(const SpectralState& state, const ModeLattice& lattice);

// Quadratic part only; writes velocity into `out.u`, magnetic into `out.b`.
// No validation: used on the integrator's hot path.
void nonlinear_term(const SpectralState& state, SpectralState& out);

NonlinearBreakdown nonlinear_breakdown(const SpectralState& state, const ModeLattice& lattice);

// 2 Re sum_k <N_u(k), u_k> + <N_b(k), b_k>, zero up to rounding.
double energy_production(const SpectralState& state, const ModeLattice& lattice);

// Real-coordinate drift F0 = (F_r, F_s, F~_r, F~_s), summed term by term in
// the real form (magnetic rows unprojected).
RealState real_drift_f0(const RealState& x, const ModeLattice& lattice);

enum class HessianMethod { bilinear, finite_difference };

// D^2 F0 [V, W] at the origin. Since F0 is linear plus quadratic this equals
// the double bracket [[F0, V], W] for constant V, W.
RealState hessian_bilinear(const ConstantVectorField& v, const ConstantVectorField& w, const LatticePtr& lattice,
                           HessianMethod method = HessianMethod::bilinear, double step = 1e-3);

}  // namespace mhd::dynamics
