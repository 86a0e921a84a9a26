#pragma once

#include <map>
#include <vector>

#include "solvctrl/algebra.hpp"
#include "solvctrl/errors.hpp"

namespace solvctrl {

/// Sparse polynomial in n variables: monomial exponent vector -> coefficient.
using PolyScalar = std::map<std::vector<int>, double>;

/// Polynomial vector field on R^n.
struct PolyVF {
  int nvars = 0;
  std::vector<PolyScalar> comp;

  static PolyVF zero(int nvars, int dim) {
    PolyVF f;
    f.nvars = nvars;
    f.comp.resize(dim);
    return f;
  }
};

namespace poly {

inline void add_term(PolyScalar& p, const std::vector<int>& mono, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = p.emplace(mono, c);
  if (!inserted) {
    it->second += c;
    if (std::abs(it->second) < 1e-15) p.erase(it);
  }
}

inline PolyScalar multiply(const PolyScalar& a, const PolyScalar& b) {
  PolyScalar out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      std::vector<int> m(ma.size());
      for (size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      add_term(out, m, ca * cb);
    }
  return out;
}

inline PolyScalar derivative(const PolyScalar& p, int var) {
  PolyScalar out;
  for (const auto& [m, c] : p) {
    if (m[var] == 0) continue;
    std::vector<int> d = m;
    d[var] -= 1;
    add_term(out, d, c * m[var]);
  }
  return out;
}

inline double evaluate(const PolyScalar& p, const Vec& x) {
  double s = 0.0;
  for (const auto& [m, c] : p) {
    double t = c;
    for (size_t i = 0; i < m.size(); ++i)
      for (int e = 0; e < m[i]; ++e) t *= x(static_cast<int>(i));
    s += t;
  }
  return s;
}

inline int degree(const PolyScalar& p) {
  int d = 0;
  for (const auto& [m, c] : p) {
    int t = 0;
    for (int e : m) t += e;
    d = std::max(d, t);
  }
  return d;
}

}  // namespace poly

inline Vec evaluate(const PolyVF& f, const Vec& x) {
  Vec out(static_cast<int>(f.comp.size()));
  for (size_t i = 0; i < f.comp.size(); ++i) out(static_cast<int>(i)) = poly::evaluate(f.comp[i], x);
  return out;
}

inline PolyVF add(const PolyVF& a, const PolyVF& b) {
  PolyVF out = a;
  for (size_t i = 0; i < out.comp.size(); ++i)
    for (const auto& [m, c] : b.comp[i]) poly::add_term(out.comp[i], m, c);
  return out;
}

/// f(x) = M x_slice, acting on variables [off, off + cols) and writing into
/// components [row_off, row_off + rows).
inline PolyVF linear_field(int nvars, int dim, const Mat& m, int var_off = 0, int row_off = 0) {
  PolyVF f = PolyVF::zero(nvars, dim);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      if (m(r, c) == 0.0) continue;
      std::vector<int> mono(nvars, 0);
      mono[var_off + c] = 1;
      poly::add_term(f.comp[row_off + r], mono, m(r, c));
    }
  return f;
}

inline PolyVF constant_field(int nvars, int dim, const Vec& v, int row_off = 0) {
  PolyVF f = PolyVF::zero(nvars, dim);
  std::vector<int> one(nvars, 0);
  for (int r = 0; r < v.size(); ++r) poly::add_term(f.comp[row_off + r], one, v(r));
  return f;
}

/// Substitute p -> ad(x) p where x are the variables [off, off + g.dim()) and
/// p lives in components [row_off, row_off + g.dim()).
inline PolyVF apply_ad(const LieAlgebra& g, const PolyVF& p, int var_off = 0, int row_off = 0) {
  PolyVF out = PolyVF::zero(p.nvars, static_cast<int>(p.comp.size()));
  for (int i = 0; i < g.dim(); ++i)
    for (int l = 0; l < g.dim(); ++l)
      for (int k = 0; k < g.dim(); ++k) {
        double c = g.structure(i, l, k);
        if (c == 0.0) continue;
        // + c * x_i * p_l contributes to component k.
        for (const auto& [m, pc] : p.comp[row_off + l]) {
          std::vector<int> mono = m;
          mono[var_off + i] += 1;
          poly::add_term(out.comp[row_off + k], mono, c * pc);
        }
      }
  return out;
}

/// The invariant-field series Z(x) = sum_j (B_j/j!) ad(x)^j Z as a
/// polynomial field of degree < class.
inline PolyVF invariant_poly_field(const LieAlgebra& g, const Vec& z, int nvars, int dim,
                                   int var_off = 0, int row_off = 0) {
  static constexpr double kBernoulliOverFactorial[] = {
      1.0, -0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0, 0.0, 1.0 / 30240.0, 0.0};
  int k = std::max(1, g.nilpotency_class());
  PolyVF acc = constant_field(nvars, dim, z, row_off);
  PolyVF power = acc;
  for (int j = 1; j < k; ++j) {
    power = apply_ad(g, power, var_off, row_off);
    double c = kBernoulliOverFactorial[j];
    if (c == 0.0) continue;
    PolyVF scaled = power;
    for (auto& comp : scaled.comp)
      for (auto& [m, cc] : comp) cc *= c;
    acc = add(acc, scaled);
  }
  return acc;
}

/// Lie bracket of vector fields: [f, g] = (Dg) f - (Df) g.
inline PolyVF lie_bracket(const PolyVF& f, const PolyVF& g) {
  const int dim = static_cast<int>(f.comp.size());
  PolyVF out = PolyVF::zero(f.nvars, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < f.nvars; ++j) {
      PolyScalar dg = poly::derivative(g.comp[i], j);
      if (!dg.empty())
        for (const auto& [m, c] : poly::multiply(dg, f.comp[j])) poly::add_term(out.comp[i], m, c);
      PolyScalar df = poly::derivative(f.comp[i], j);
      if (!df.empty())
        for (const auto& [m, c] : poly::multiply(df, g.comp[j])) poly::add_term(out.comp[i], m, -c);
    }
  }
  return out;
}

/// Rank-tracking span of polynomial vector fields over their coefficient
/// space; add() reports whether the field enlarged the span. Coefficients
/// are flattened monomial-major at stable positions (the monomial index
/// only appends), so index growth is a zero-pad of the stored basis.
class PolySpan {
 public:
  explicit PolySpan(double rel_tol = 1e-9) : rel_tol_(rel_tol) {}

  bool add(const PolyVF& f) {
    Vec row = flatten(f);
    if (row.norm() < 1e-14) return false;
    if (basis_.cols() == 0) {
      basis_ = row.normalized();
      fields_.push_back(f);
      return true;
    }
    if (row.size() > basis_.rows()) {
      Mat padded = Mat::Zero(row.size(), basis_.cols());
      padded.topRows(basis_.rows()) = basis_;
      basis_ = std::move(padded);
    }
    Vec r = row - basis_ * (basis_.transpose() * row);
    if (r.norm() <= rel_tol_ * row.norm()) return false;
    Mat next(basis_.rows(), basis_.cols() + 1);
    next << basis_, r.normalized();
    basis_ = std::move(next);
    fields_.push_back(f);
    return true;
  }

  const std::vector<PolyVF>& fields() const { return fields_; }
  int dim() const { return static_cast<int>(fields_.size()); }

 private:
  Vec flatten(const PolyVF& f) {
    const int dim = static_cast<int>(f.comp.size());
    for (const auto& comp : f.comp)
      for (const auto& [m, c] : comp)
        if (!index_.count(m)) {
          int id = static_cast<int>(index_.size());
          index_[m] = id;
        }
    Vec row = Vec::Zero(static_cast<Eigen::Index>(index_.size()) * dim);
    for (int i = 0; i < dim; ++i)
      for (const auto& [m, c] : f.comp[i]) row(index_.at(m) * dim + i) = c;
    return row;
  }

  double rel_tol_;
  std::map<std::vector<int>, int> index_;
  Mat basis_;
  std::vector<PolyVF> fields_;
};

}  // namespace solvctrl
