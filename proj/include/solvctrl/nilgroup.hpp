#pragma once

#include <map>
#include <mutex>
#include <numeric>
#include <vector>

#include "solvctrl/algebra.hpp"
#include "solvctrl/errors.hpp"
#include "solvctrl/tolerances.hpp"

namespace solvctrl {

/// Element of the simply connected nilpotent group (n, *) in exponential
/// coordinates. The identity is the zero vector and inversion is negation.
using GroupPoint = Vec;

namespace bch {

/// Exact rational arithmetic for the series coefficients. 128-bit storage
/// keeps the unreduced intermediates of the degree-7 series in range.
struct Frac {
  __int128 num = 0, den = 1;

  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }
  Frac operator+(const Frac& o) const {
    Frac r{num * o.den + o.num * den, den * o.den};
    r.reduce();
    return r;
  }
  Frac operator*(const Frac& o) const {
    Frac r{num * o.num, den * o.den};
    r.reduce();
    return r;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool zero() const { return num == 0; }
};

// Words over {x, y} of length <= k: id = 2^len - 1 + bits, bit 0 = first letter.
inline int word_id(int len, unsigned bits) { return (1 << len) - 1 + static_cast<int>(bits); }
inline int total_words(int k) { return (1 << (k + 1)) - 1; }

using FreePoly = std::vector<Frac>;  // indexed by word id

inline FreePoly multiply(const FreePoly& a, const FreePoly& b, int k) {
  FreePoly out(total_words(k));
  for (int la = 0; la <= k; ++la)
    for (unsigned ba = 0; ba < (1u << la); ++ba) {
      const Frac& ca = a[word_id(la, ba)];
      if (ca.zero()) continue;
      for (int lb = 0; lb + la <= k; ++lb)
        for (unsigned bb = 0; bb < (1u << lb); ++bb) {
          const Frac& cb = b[word_id(lb, bb)];
          if (cb.zero()) continue;
          unsigned bits = ba | (bb << la);
          int id = word_id(la + lb, bits);
          out[id] = out[id] + ca * cb;
        }
    }
  return out;
}

struct Term {
  int len;
  unsigned bits;
  double coeff;  // includes the 1/len Dynkin factor
};

/// Nested-bracket evaluation table for log(exp(x) exp(y)) truncated at total
/// degree k. Each homogeneous word contributes coeff/len times its
/// left-nested bracketing (Dynkin-Specht-Wever). Generated once per degree
/// and frozen.
inline const std::vector<Term>& table(int k) {
  static std::mutex mu;
  static std::map<int, std::vector<Term>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;

  auto factorial_inv = [](int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return Frac{1, f};
  };
  FreePoly ex(total_words(k)), ey(total_words(k));
  for (int n = 0; n <= k; ++n) {
    ex[word_id(n, 0u)] = factorial_inv(n);
    ey[word_id(n, (1u << n) - 1)] = factorial_inv(n);
  }
  FreePoly prod = multiply(ex, ey, k);
  prod[0] = Frac{0, 1};  // A = exp(x) exp(y) - 1

  FreePoly log_series(total_words(k));
  FreePoly apow = prod;
  for (int m = 1; m <= k; ++m) {
    Frac c{(m % 2 == 1) ? 1 : -1, m};
    for (int id = 0; id < total_words(k); ++id)
      log_series[id] = log_series[id] + c * apow[id];
    if (m < k) apow = multiply(apow, prod, k);
  }

  std::vector<Term> terms;
  for (int len = 1; len <= k; ++len)
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      const Frac& c = log_series[word_id(len, bits)];
      if (c.zero()) continue;
      // Left-nested bracketing kills words whose first two letters agree.
      if (len >= 2 && ((bits & 1u) == ((bits >> 1) & 1u))) continue;
      terms.push_back({len, bits, c.value() / len});
    }
  auto [pos, ok] = cache.emplace(k, std::move(terms));
  (void)ok;
  return pos->second;
}

}  // namespace bch

/// Group product x * y via the BCH series truncated at the nilpotency class
/// (exact: all higher terms vanish).
inline GroupPoint bch_product(const LieAlgebra& g, const GroupPoint& x, const GroupPoint& y) {
  if (!g.is_nilpotent())
    throw HypothesisError("not-nilpotent", "the BCH product requires a nilpotent algebra");
  const int n = g.dim();
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("group point dimension mismatch");
  int k = std::max(1, g.nilpotency_class());
  Vec out = Vec::Zero(n);
  for (const auto& t : bch::table(k)) {
    Vec v = (t.bits & 1u) ? y : x;
    for (int i = 1; i < t.len; ++i) v = g.bracket(v, ((t.bits >> i) & 1u) ? y : x);
    out += t.coeff * v;
  }
  return out;
}

inline GroupPoint group_inverse(const GroupPoint& x) { return -x; }

/// Right-invariant vector field Z(x) = sum_j (B_j / j!) ad(x)^j Z with
/// Bernoulli numbers B_j (B_1 = -1/2), truncated at the nilpotency class.
/// The coefficient convention is pinned by the finite-difference oracle
/// d/ds|_0 (sZ * x) in the test suite.
inline Vec right_invariant_field(const LieAlgebra& g, const Vec& z, const GroupPoint& x) {
  static constexpr double kBernoulliOverFactorial[] = {
      1.0, -0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0, 0.0, 1.0 / 30240.0, 0.0};
  if (!g.is_nilpotent())
    throw HypothesisError("not-nilpotent", "invariant fields require a nilpotent algebra");
  int k = std::max(1, g.nilpotency_class());
  if (k > 8)
    throw std::invalid_argument("nilpotency class beyond the supported coefficient table");
  Vec acc = z, w = z;
  for (int j = 1; j < k; ++j) {
    w = g.bracket(x, w);
    double c = kBernoulliOverFactorial[j];
    if (c != 0.0) acc += c * w;
  }
  return acc;
}

/// Bracket-preservation residual of a linear map, relative to |phi|^2.
inline double automorphism_residual(const LieAlgebra& g, const Mat& m) {
  double res = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i + 1; j < g.dim(); ++j) {
      Vec ei = Vec::Unit(g.dim(), i), ej = Vec::Unit(g.dim(), j);
      Vec r = m * g.bracket(ei, ej) - g.bracket(m * ei, m * ej);
      res = std::max(res, r.cwiseAbs().maxCoeff());
    }
  double scale = std::max(1.0, m.squaredNorm()) * std::max(1.0, g.structure_scale());
  return res / scale;
}

/// Invertible linear map certified to preserve the bracket.
class GroupAutomorphism {
 public:
  GroupAutomorphism(const LieAlgebra& g, Mat m) : matrix_(std::move(m)) {
    if (matrix_.rows() != g.dim() || matrix_.cols() != g.dim())
      throw std::invalid_argument("automorphism dimension mismatch");
    residual_ = automorphism_residual(g, matrix_);
    if (residual_ > tol::autom_rel)
      throw NumericError("automorphism-certificate-failed",
                         "bracket preservation residual too large", residual_);
    Eigen::FullPivLU<Mat> lu(matrix_);
    if (!lu.isInvertible())
      throw NumericError("automorphism-certificate-failed", "matrix is singular");
  }

  const Mat& matrix() const { return matrix_; }
  double certificate_residual() const { return residual_; }

 private:
  Mat matrix_;
  double residual_;
};

/// f_phi(x) = x * phi(x)^{-1}.
inline GroupPoint f_phi_apply(const LieAlgebra& g, const GroupAutomorphism& phi,
                              const GroupPoint& x) {
  return bch_product(g, x, -(phi.matrix() * x));
}

namespace detail {

inline double det_gap(const Mat& phi) {
  Mat m = Mat::Identity(phi.rows(), phi.cols()) - phi;
  return std::abs(m.determinant());
}

inline Vec f_phi_apply_raw(const LieAlgebra& g, const Mat& phi, const Vec& x) {
  return bch_product(g, x, -(phi * x));
}

inline Vec f_phi_invert_raw(const LieAlgebra& g, const Mat& phi, const Vec& y) {
  const int n = g.dim();
  double gap = det_gap(phi);
  if (gap <= tol::det_gap(phi.norm()))
    throw HypothesisError("det-gap-too-small",
                          "|det(phi - 1)| = " + std::to_string(gap) +
                              " is below the invertibility threshold");
  if (g.is_abelian()) {
    Eigen::FullPivLU<Mat> lu(Mat::Identity(n, n) - phi);
    return lu.solve(y);
  }

  Subspace z = center(g);
  QuotientAlgebra quo = quotient_algebra(g, z);
  Mat phi_hat = quo.projection * phi * quo.lift;
  double ind_res = automorphism_residual(quo.algebra, phi_hat);
  if (ind_res > 1e-8)
    throw NumericError("automorphism-certificate-failed",
                       "induced quotient map fails bracket preservation", ind_res);
  Vec x_hat = f_phi_invert_raw(quo.algebra, phi_hat, quo.projection * y);
  Vec x1 = quo.lift * x_hat;  // minimum-norm preimage

  Vec r = bch_product(g, -f_phi_apply_raw(g, phi, x1), y);
  Vec rz = z.basis().transpose() * r;
  double central_res = (r - z.basis() * rz).norm();
  if (central_res > 1e-7 * std::max(1.0, y.norm() + x1.norm()))
    throw NumericError("residual-not-central",
                       "layer residual does not lie in the center", central_res);

  Mat phi_z = z.basis().transpose() * phi * z.basis();
  double inv_res = (phi * z.basis() - z.basis() * phi_z).norm();
  if (inv_res > 1e-8 * std::max(1.0, phi.norm()))
    throw NumericError("residual-not-central", "center is not phi-invariant", inv_res);
  Mat a = Mat::Identity(z.dim(), z.dim()) - phi_z;
  if (std::abs(a.determinant()) <= tol::det_gap(phi_z.norm()))
    throw HypothesisError("det-gap-too-small", "det(phi - 1) vanishes on the center");
  Vec w = z.basis() * a.fullPivLu().solve(rz).eval();
  return bch_product(g, x1, w);
}

}  // namespace detail

/// Unique x with f_phi(x) = y, by the layered center/quotient recursion.
/// The round-trip residual is verified before returning.
inline GroupPoint f_phi_invert(const LieAlgebra& g, const GroupAutomorphism& phi,
                               const GroupPoint& y) {
  Vec x = detail::f_phi_invert_raw(g, phi.matrix(), y);
  double rt = (f_phi_apply(g, phi, x) - y).norm();
  if (rt > tol::inv * std::max(1.0, y.norm() + x.norm()))
    throw NumericError("inversion-round-trip", "round-trip residual too large", rt);
  return x;
}

struct CurveInvertResult {
  std::vector<GroupPoint> points;      // NaN-filled on per-point failure
  std::vector<std::string> errors;     // empty string = success
  double max_jump = 0.0;               // largest |x_{i+1} - x_i|
  double max_jump_ratio = 0.0;         // jump / input step
};

/// Pointwise inversion along a sampled curve of (phi, y) pairs. Per-point
/// failures are collected, not fatal. Successive outputs are expected to
/// move continuously when the inputs do; the observed jump/step ratio is
/// reported so callers can flag discontinuities.
inline CurveInvertResult curve_invert(const LieAlgebra& g,
                                      const std::vector<GroupAutomorphism>& phis,
                                      const std::vector<GroupPoint>& ys) {
  if (phis.size() != ys.size()) throw std::invalid_argument("curve length mismatch");
  CurveInvertResult out;
  for (size_t i = 0; i < phis.size(); ++i) {
    try {
      out.points.push_back(f_phi_invert(g, phis[i], ys[i]));
      out.errors.emplace_back();
    } catch (const std::exception& e) {
      out.points.push_back(Vec::Constant(g.dim(), std::nan("")));
      out.errors.emplace_back(e.what());
    }
  }
  for (size_t i = 0; i + 1 < out.points.size(); ++i) {
    if (!out.errors[i].empty() || !out.errors[i + 1].empty()) continue;
    double jump = (out.points[i + 1] - out.points[i]).norm();
    double step = (phis[i + 1].matrix() - phis[i].matrix()).norm() +
                  (ys[i + 1] - ys[i]).norm();
    out.max_jump = std::max(out.max_jump, jump);
    if (step > 0.0) out.max_jump_ratio = std::max(out.max_jump_ratio, jump / step);
  }
  return out;
}

}  // namespace solvctrl
