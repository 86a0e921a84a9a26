#pragma once

// Shared fixtures: the small algebras every suite exercises.

#include "solvctrl/algebra.hpp"

namespace testsupport {

using solvctrl::LieAlgebra;
using solvctrl::Mat;
using solvctrl::StructureTriple;
using solvctrl::Vec;

// Heisenberg h3: [e1, e2] = e3.
inline LieAlgebra heisenberg3() {
  return LieAlgebra::from_triples(3, {{1, 2, 3, 1.0}});
}

// Filiform n4: [e1, e2] = e3, [e1, e3] = e4.
inline LieAlgebra filiform4() {
  return LieAlgebra::from_triples(4, {{1, 2, 3, 1.0}, {1, 3, 4, 1.0}});
}

// Solvable, non-nilpotent {T, X, Y}: [T, X] = Y, [T, Y] = -X.
inline LieAlgebra euclid_like() {
  return LieAlgebra::from_triples(3, {{1, 2, 3, 1.0}, {1, 3, 2, -1.0}},
                                  {"T", "X", "Y"});
}

// sl2: [e, f] = h, [h, e] = 2e, [h, f] = -2f with basis order (e, f, h).
inline LieAlgebra sl2() {
  return LieAlgebra::from_triples(
      3, {{1, 2, 3, 1.0}, {3, 1, 1, 2.0}, {3, 2, 2, -2.0}});
}

inline LieAlgebra abelian(int n) { return LieAlgebra::from_triples(n, {}); }

inline Vec unit(int n, int i) { return Vec::Unit(n, i); }

}  // namespace testsupport
