#pragma once

namespace solvctrl::tol {

// Absolute ceiling for Jacobi / Leibniz / bracket-preservation residuals
// on desk-scale structure constants.
inline constexpr double alg = 1e-10;

// Relative singular-value threshold for rank decisions.
inline constexpr double rank_rel = 1e-9;

// Relative eigenvalue clustering radius (times the matrix norm).
inline constexpr double eig_rel = 1e-7;

// Round-trip residual required of the layered automorphism-map inverse.
inline constexpr double inv = 1e-9;

// Re-integrated periodicity residual required of a seed certificate.
inline constexpr double seed = 1e-7;

// Relative bracket-preservation residual accepted by the automorphism
// certificate.
inline constexpr double autom_rel = 1e-9;

// Mutual-reachability ball radius used as control-set membership proxy
// at catalog scale (overridable per system file).
inline constexpr double r_match = 0.05;

// det(phi - 1) gap below which the inverse of x -> x * phi(x)^{-1} is
// refused; scaled by (1 + |phi|).
inline double det_gap(double phi_norm) { return 1e-8 * (1.0 + phi_norm); }

}  // namespace solvctrl::tol
