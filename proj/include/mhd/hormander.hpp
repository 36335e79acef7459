#pragma once

#include <map>
#include <string>
#include <vector>

#include "mhd/vector_field.hpp"

namespace mhd::hormander {

// [[F0, V], W] for constant fields V at m, W at n (both in K~).
BracketResult double_bracket(const ConstantVectorField& v, const ConstantVectorField& w, const ModeLattice& lattice);

struct MixedBrackets {
  BracketResult rr;  // [[F0,V^r],W^s] + [[F0,V^s],W^r]: lives on (r, r~) at m+n
  BracketResult ss;  // [[F0,V^r],W^r] - [[F0,V^s],W^s]: lives on (s, s~) at m+n
};

// V^r = v.d/dr_m + v~.d/dr~_m, V^s = v.d/ds_m + v~.d/ds~_m, likewise W at n.
MixedBrackets mixed_brackets(const WaveVector& m, const Vec3& v, const Vec3& vt, const WaveVector& n, const Vec3& w,
                             const Vec3& wt, const ModeLattice& lattice);

enum class ClosureMethod { rules, span };

std::string to_string(ClosureMethod m);
ClosureMethod parse_closure_method(const std::string& name);

struct ClosureReport {
  ClosureMethod method = ClosureMethod::span;
  int N = 0;
  std::vector<WaveVector> forced;           // folded onto K~
  std::map<WaveVector, int> attained;       // k in K~ -> dim (0..8)
  std::vector<WaveVector> A_of_N;           // full-dimension modes, both signs
  std::vector<WaveVector> provisional;      // rules method: equal-norm fusions (dim 4)
  bool hypoelliptic = false;
  int iterations = 0;

  nlohmann::json to_json() const;
};

ClosureReport closure(const std::vector<WaveVector>& forced, const ModeLattice& lattice,
                      ClosureMethod method = ClosureMethod::span);

// Span closure; hypoelliptic iff every mode attains dimension 8.
ClosureReport verdict(const std::vector<WaveVector>& forced, const ModeLattice& lattice);

// Orthonormal basis (8 columns, 12 rows) of the constant fields at k.
Eigen::MatrixXd full_mode_basis(const WaveVector& k);

}  // namespace mhd::hormander
