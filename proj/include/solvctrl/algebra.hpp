#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "solvctrl/errors.hpp"
#include "solvctrl/linalg.hpp"
#include "solvctrl/rng.hpp"

namespace solvctrl {

/// One nonzero structure constant: [e_i, e_j] = c * e_k, indices 1-based.
struct StructureTriple {
  int i, j, k;
  double c;
};

/// Finite-dimensional Lie algebra over a fixed basis, given by structure
/// constants. Antisymmetry is enforced by construction; the Jacobi identity
/// is verified on all basis triples and violations are refused.
class LieAlgebra {
 public:
  LieAlgebra() = default;  // zero algebra

  static LieAlgebra from_triples(int dim, const std::vector<StructureTriple>& triples,
                                 std::vector<std::string> labels = {}) {
    if (dim < 0) throw std::invalid_argument("algebra dimension must be >= 0");
    std::vector<Mat> ads(dim, Mat::Zero(dim, dim));
    std::vector<std::vector<char>> seen(dim, std::vector<char>(dim * dim, 0));
    for (const auto& t : triples) {
      if (t.i < 1 || t.i > dim || t.j < 1 || t.j > dim || t.k < 1 || t.k > dim)
        throw std::invalid_argument("structure-constant index out of range");
      if (t.i == t.j) throw std::invalid_argument("bracket [e_i, e_i] must be zero");
      int i = t.i - 1, j = t.j - 1, k = t.k - 1;
      if (seen[i][j * dim + k]) throw std::invalid_argument("duplicate structure constant");
      if (seen[j][i * dim + k] && std::abs(ads[j](k, i) + t.c) > 0.0)
        throw std::invalid_argument("structure constants violate antisymmetry");
      seen[i][j * dim + k] = 1;
      ads[i](k, j) = t.c;
      if (!seen[j][i * dim + k]) ads[j](k, i) = -t.c;
    }
    return LieAlgebra(std::move(ads), std::move(labels));
  }

  /// From precomputed ad-matrices (ad(e_i) columns are [e_i, e_j] coords).
  static LieAlgebra from_ad(std::vector<Mat> ads, std::vector<std::string> labels = {}) {
    return LieAlgebra(std::move(ads), std::move(labels));
  }

  int dim() const { return static_cast<int>(ads_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// c[i][j][k] with zero-based indices.
  double structure(int i, int j, int k) const { return ads_[i](k, j); }

  const Mat& ad(int i) const { return ads_[i]; }

  /// ad(x) = sum_i x_i ad(e_i); ad(x) y = [x, y].
  Mat ad(const Vec& x) const {
    Mat m = Mat::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i)
      if (x(i) != 0.0) m += x(i) * ads_[i];
    return m;
  }

  Vec bracket(const Vec& a, const Vec& b) const {
    if (a.size() != dim() || b.size() != dim())
      throw std::invalid_argument("element dimension does not match algebra");
    Vec out = Vec::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      if (a(i) != 0.0) out += a(i) * (ads_[i] * b);
    return out;
  }

  double jacobi_residual() const { return jacobi_residual_; }
  bool is_abelian() const { return nilpotency_class_ >= 0 && nilpotency_class_ <= 1; }
  bool is_nilpotent() const { return nilpotency_class_ >= 0; }
  /// Degree of nilpotence k (last nonzero term of the lower central
  /// series); -1 when the series stabilizes at a nonzero subspace.
  int nilpotency_class() const { return nilpotency_class_; }
  bool is_solvable() const { return solvable_; }

  /// Largest |c[i][j][k]|.
  double structure_scale() const {
    double s = 0.0;
    for (const auto& m : ads_) s = std::max(s, m.cwiseAbs().maxCoeff());
    return s;
  }

 private:
  LieAlgebra(std::vector<Mat> ads, std::vector<std::string> labels)
      : ads_(std::move(ads)), labels_(std::move(labels)) {
    int n = dim();
    if (labels_.empty())
      for (int i = 0; i < n; ++i) labels_.push_back("e" + std::to_string(i + 1));
    if (static_cast<int>(labels_.size()) != n)
      throw std::invalid_argument("label count does not match dimension");

    double cscale = std::max(1.0, structure_scale());
    jacobi_residual_ = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double anti = (ads_[i].col(j) + ads_[j].col(i)).cwiseAbs().maxCoeff();
        if (anti > 0.0) throw std::invalid_argument("structure constants not antisymmetric");
        for (int l = j + 1; l < n; ++l) {
          Vec r = bracket(basis(i), bracket(basis(j), basis(l))) +
                  bracket(basis(j), bracket(basis(l), basis(i))) +
                  bracket(basis(l), bracket(basis(i), basis(j)));
          jacobi_residual_ = std::max(jacobi_residual_, r.cwiseAbs().maxCoeff());
        }
      }
    if (jacobi_residual_ > 1e-10 * cscale * cscale)
      throw HypothesisError("jacobi-identity",
                            "Jacobi residual " + std::to_string(jacobi_residual_) +
                                " exceeds tolerance");

    nilpotency_class_ = compute_nilpotency_class();
    solvable_ = compute_solvable();
  }

  Vec basis(int i) const {
    Vec v = Vec::Zero(dim());
    v(i) = 1.0;
    return v;
  }

  Mat bracket_span(const Mat& a, const Mat& b) const {
    Mat cand(dim(), a.cols() * b.cols());
    for (int i = 0; i < a.cols(); ++i)
      for (int j = 0; j < b.cols(); ++j)
        cand.col(i * b.cols() + j) = bracket(a.col(i), b.col(j));
    return linalg::column_space(cand);
  }

  int compute_nilpotency_class() const {
    if (dim() == 0) return 0;
    Mat s = Mat::Identity(dim(), dim());
    int k = 0;
    while (s.cols() > 0) {
      Mat next = bracket_span(Mat::Identity(dim(), dim()), s);
      ++k;
      if (next.cols() == s.cols()) return -1;  // stabilized nonzero
      s = next;
    }
    return k;
  }

  bool compute_solvable() const {
    Mat s = Mat::Identity(dim(), dim());
    while (s.cols() > 0) {
      Mat next = bracket_span(s, s);
      if (next.cols() == s.cols()) return false;
      s = next;
    }
    return true;
  }

  std::vector<Mat> ads_;
  std::vector<std::string> labels_;
  double jacobi_residual_ = 0.0;
  int nilpotency_class_ = 0;
  bool solvable_ = true;
};

/// Subspace of a fixed ambient coordinate space, kept as an orthonormal
/// column basis. The basis is canonicalized by orthogonalizing the projected
/// standard basis vectors in index order, so axis-aligned subspaces come out
/// as signed unit vectors and repeated constructions are deterministic.
class Subspace {
 public:
  Subspace() = default;
  Subspace(int ambient, const Mat& spanning) : ambient_(ambient) {
    if (spanning.rows() != ambient) throw std::invalid_argument("subspace ambient mismatch");
    Mat q = linalg::column_space(spanning);
    const int r = static_cast<int>(q.cols());
    Mat canon(ambient, r);
    int got = 0;
    for (int i = 0; i < ambient && got < r; ++i) {
      Vec v = q * (q.transpose() * Vec::Unit(ambient, i));
      for (int c = 0; c < got; ++c) v -= canon.col(c).dot(v) * canon.col(c);
      if (v.norm() > 1e-8) canon.col(got++) = v / v.norm();
    }
    basis_ = (got == r) ? canon : q;
  }

  static Subspace zero(int ambient) { return Subspace(ambient, Mat(ambient, 0)); }
  static Subspace full(int ambient) { return Subspace(ambient, Mat::Identity(ambient, ambient)); }

  int ambient() const { return ambient_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  bool orthonormalized() const { return true; }

  bool contains(const Vec& v, double tol_abs = 1e-9) const {
    return linalg::distance_to_span(basis_, v) <= tol_abs * std::max(1.0, v.norm());
  }

  bool contains(const Subspace& other, double tol_abs = 1e-9) const {
    return linalg::contained_in(other.basis_, basis_, tol_abs);
  }

  bool equals(const Subspace& other, double angle_tol = 1e-8) const {
    return dim() == other.dim() &&
           linalg::max_principal_angle(basis_, other.basis_) <= angle_tol;
  }

  /// Orthogonal projection of v onto the subspace.
  Vec project(const Vec& v) const { return basis_ * (basis_.transpose() * v); }

  static Subspace intersect(const Subspace& a, const Subspace& b) {
    if (a.ambient() != b.ambient()) throw std::invalid_argument("ambient mismatch");
    if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(a.ambient());
    Mat stacked(a.ambient(), a.dim() + b.dim());
    stacked << a.basis(), -b.basis();
    Mat ker = linalg::kernel(stacked);
    if (ker.cols() == 0) return Subspace::zero(a.ambient());
    Mat inter = a.basis() * ker.topRows(a.dim());
    return Subspace(a.ambient(), inter);
  }

  static Subspace sum(const Subspace& a, const Subspace& b) {
    if (a.ambient() != b.ambient()) throw std::invalid_argument("ambient mismatch");
    Mat stacked(a.ambient(), a.dim() + b.dim());
    stacked << a.basis(), b.basis();
    return Subspace(a.ambient(), stacked);
  }

 private:
  int ambient_ = 0;
  Mat basis_;
};

// ---------------------------------------------------------------------------
// Subspace / ideal calculus
// ---------------------------------------------------------------------------

/// Center {x : [x, e_i] = 0 for all i}, the null space of the stacked
/// ad-matrices.
inline Subspace center(const LieAlgebra& g) {
  int n = g.dim();
  if (n == 0) return Subspace::zero(0);
  Mat stacked(n * n, n);
  for (int i = 0; i < n; ++i) stacked.middleRows(i * n, n) = g.ad(i);
  return Subspace(n, linalg::kernel(stacked));
}

inline Mat bracket_pairs(const LieAlgebra& g, const Mat& a, const Mat& b) {
  Mat cand(g.dim(), a.cols() * b.cols());
  for (int i = 0; i < a.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      cand.col(i * b.cols() + j) = g.bracket(a.col(i), b.col(j));
  return cand;
}

/// g^1 = g, g^{i+1} = [g, g^i]; the returned list stops at the first zero
/// term (excluded). Nilpotent iff the series reaches zero.
inline std::vector<Subspace> lower_central_series(const LieAlgebra& g) {
  std::vector<Subspace> series;
  Subspace s = Subspace::full(g.dim());
  while (s.dim() > 0) {
    series.push_back(s);
    Subspace next(g.dim(), bracket_pairs(g, Mat::Identity(g.dim(), g.dim()), s.basis()));
    if (next.dim() == s.dim()) {
      series.push_back(next);  // stabilized nonzero: expose it, caller sees non-nilpotency
      break;
    }
    s = next;
  }
  return series;
}

inline int nilpotency_class(const LieAlgebra& g) { return g.nilpotency_class(); }

/// g^{(0)} = g, g^{(i+1)} = [g^{(i)}, g^{(i)}]; stops at zero or at a
/// stabilized nonzero term.
inline std::vector<Subspace> derived_series(const LieAlgebra& g) {
  std::vector<Subspace> series;
  Subspace s = Subspace::full(g.dim());
  while (s.dim() > 0) {
    series.push_back(s);
    Subspace next(g.dim(), bracket_pairs(g, s.basis(), s.basis()));
    if (next.dim() == s.dim()) {
      series.push_back(next);
      break;
    }
    s = next;
  }
  return series;
}

inline bool is_solvable(const LieAlgebra& g) { return g.is_solvable(); }

inline Subspace derived_subalgebra(const LieAlgebra& g) {
  Mat id = Mat::Identity(g.dim(), g.dim());
  return Subspace(g.dim(), bracket_pairs(g, id, id));
}

inline bool is_ideal(const LieAlgebra& g, const Subspace& h, double tol_abs = 1e-9) {
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < h.dim(); ++j)
      if (!h.contains(g.bracket(Vec::Unit(g.dim(), i), h.basis().col(j)), tol_abs))
        return false;
  return true;
}

/// Structure constants induced on the columns of `basis` (must span a
/// subalgebra; closure is verified).
struct InducedAlgebra {
  LieAlgebra algebra;
  Mat basis;  // ambient_dim x sub_dim, orthonormal
};

inline InducedAlgebra subalgebra_structure(const LieAlgebra& g, const Subspace& s,
                                           double tol_abs = 1e-9) {
  int r = s.dim();
  Mat b = s.basis();
  std::vector<Mat> ads(r, Mat::Zero(r, r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Vec w = g.bracket(b.col(i), b.col(j));
      Vec coords = b.transpose() * w;
      if ((w - b * coords).norm() > tol_abs * std::max(1.0, w.norm()))
        throw std::invalid_argument("basis does not span a subalgebra");
      ads[i].col(j) = coords;
    }
  return {LieAlgebra::from_ad(std::move(ads)), b};
}

/// Quotient g / ideal with the projection onto quotient coordinates and the
/// lift (complement basis, chosen by orthogonalizing the standard basis
/// against the ideal in pivot order).
struct QuotientAlgebra {
  LieAlgebra algebra;
  Mat projection;  // quo_dim x ambient_dim
  Mat lift;        // ambient_dim x quo_dim, orthonormal complement basis
};

inline QuotientAlgebra quotient_algebra(const LieAlgebra& g, const Subspace& ideal,
                                        double tol_abs = 1e-9) {
  int n = g.dim(), r = ideal.dim();
  if (!is_ideal(g, ideal, tol_abs))
    throw HypothesisError("not-an-ideal", "[g, h] is not contained in h");
  int q = n - r;
  Mat lift(n, q);
  {
    Mat chosen(n, 0);
    int got = 0;
    for (int i = 0; i < n && got < q; ++i) {
      Vec v = Vec::Unit(n, i);
      v -= ideal.project(v);
      for (int c = 0; c < got; ++c) v -= lift.col(c).dot(v) * lift.col(c);
      if (v.norm() > 1e-8) lift.col(got++) = v / v.norm();
    }
    if (got < q) throw NumericError("quotient-complement", "complement construction failed");
  }
  Mat full(n, n);
  full << lift, ideal.basis();
  Mat inv = full.inverse();
  Mat proj = inv.topRows(q);

  std::vector<Mat> ads(q, Mat::Zero(q, q));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      ads[i].col(j) = proj * g.bracket(lift.col(i), lift.col(j));
  return {LieAlgebra::from_ad(std::move(ads)), proj, lift};
}

// ---------------------------------------------------------------------------
// Nilradical via constructive triangularization
// ---------------------------------------------------------------------------

namespace detail {

/// Common eigenvector of the matrix Lie algebra spanned by `ops` (a solvable
/// family, e.g. the image of ad on an invariant quotient). Recursive over a
/// codimension-1 ideal containing the commutators.
inline CVec common_eigenvector(const std::vector<CMat>& ops, Rng& rng, double tol_abs) {
  const int q = ops.empty() ? 0 : static_cast<int>(ops[0].rows());
  if (q == 0) throw NumericError("triangularization-failed", "empty space");

  // Independent basis of the span of ops.
  Mat flat(2 * q * q, static_cast<int>(ops.size()));
  for (size_t i = 0; i < ops.size(); ++i) {
    CVec v = Eigen::Map<const CVec>(ops[i].data(), q * q);
    flat.col(static_cast<int>(i)) << v.real(), v.imag();
  }
  std::vector<CMat> basis;
  {
    Mat have(2 * q * q, 0);
    for (size_t i = 0; i < ops.size(); ++i) {
      Mat trial(2 * q * q, have.cols() + 1);
      trial << have, flat.col(static_cast<int>(i));
      if (linalg::rank(trial) > have.cols()) {
        have = linalg::column_space(trial);
        basis.push_back(ops[i]);
      }
    }
  }
  const int d = static_cast<int>(basis.size());
  if (d == 0) return CVec::Unit(q, 0);
  if (d == 1) {
    Eigen::ComplexEigenSolver<CMat> es(basis[0]);
    std::vector<int> order(q);
    for (int i = 0; i < q; ++i) order[i] = i;
    for (int i = q - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (int idx : order) {
      CVec v = es.eigenvectors().col(idx);
      if (v.norm() > 0.5) return v.normalized();
    }
    throw NumericError("triangularization-failed", "no eigenvector found");
  }

  // Codim-1 ideal containing the commutator span; the leftover independent
  // basis element is the complement direction z.
  std::vector<CMat> comms;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) comms.push_back(basis[i] * basis[j] - basis[j] * basis[i]);
  std::vector<CMat> ideal;
  CMat z;
  {
    Mat have(2 * q * q, 0);
    auto try_add = [&](const CMat& m) -> bool {
      CVec v = Eigen::Map<const CVec>(m.data(), q * q);
      Mat col(2 * q * q, 1);
      col << v.real(), v.imag();
      Mat trial(2 * q * q, have.cols() + 1);
      trial << have, col;
      if (linalg::rank(trial) > have.cols()) {
        have = linalg::column_space(trial);
        return true;
      }
      return false;
    };
    for (const auto& m : comms)
      if (try_add(m)) ideal.push_back(m);
    if (static_cast<int>(ideal.size()) >= d)
      throw NumericError("triangularization-failed",
                         "commutators span the whole family: not solvable");
    for (const auto& m : basis) {
      if (!try_add(m)) continue;
      if (static_cast<int>(ideal.size()) < d - 1)
        ideal.push_back(m);
      else {
        z = m;
        break;
      }
    }
    if (z.size() == 0)
      throw NumericError("triangularization-failed", "could not split a complement direction");
  }

  CVec v = common_eigenvector(ideal, rng, tol_abs);

  // Joint eigenspace of the ideal at the eigenvalue functional of v.
  CMat stacked(static_cast<int>(ideal.size()) * q, q);
  for (size_t i = 0; i < ideal.size(); ++i) {
    std::complex<double> lam = v.dot(ideal[i] * v);  // v is unit
    stacked.middleRows(static_cast<int>(i) * q, q) = ideal[i] - lam * CMat::Identity(q, q);
  }
  Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeFullV);
  double smax = svd.singularValues()(0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > std::max(tol_abs, 1e-9 * smax)) ++rank;
  if (rank == q)
    throw NumericError("triangularization-failed", "joint eigenspace collapsed");
  CMat w = svd.matrixV().rightCols(q - rank);

  // The joint eigenspace is invariant under z (Lie invariance); verify.
  CMat zr = w.adjoint() * (z * w);
  double inv_res = (z * w - w * zr).norm();
  if (inv_res > std::max(tol_abs, 1e-7 * (1.0 + z.norm())))
    throw NumericError("triangularization-failed", "eigenspace not z-invariant", inv_res);

  Eigen::ComplexEigenSolver<CMat> es(zr);
  int m = static_cast<int>(zr.rows());
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  for (int i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  CVec cand = w * es.eigenvectors().col(order[0]);
  return cand.normalized();
}

}  // namespace detail

/// Largest nilpotent ideal of a solvable algebra. Computed by constructive
/// triangularization over the complexification: iteratively extract common
/// eigenvectors of {ad(e_i)}, collect the diagonal weight functionals, and
/// intersect their kernels. Failure to triangularize is reported, never
/// approximated.
inline Subspace nilradical(const LieAlgebra& g) {
  const int n = g.dim();
  if (!g.is_solvable())
    throw HypothesisError("not-solvable", "nilradical requires a solvable algebra");
  if (n == 0) return Subspace::zero(0);

  Rng rng(0x5eedu);  // fixed seed: reproducible tie-breaking
  double scale = std::max(1.0, g.structure_scale());
  double tol_abs = 1e-9 * scale;

  // Build the flag.
  CMat flag(n, 0);
  for (int step = 0; step < n; ++step) {
    int r = static_cast<int>(flag.cols());
    // Orthonormal complement of the flag span.
    CMat qc;
    if (r == 0) {
      qc = CMat::Identity(n, n);
    } else {
      Eigen::JacobiSVD<CMat> svd(flag, Eigen::ComputeFullU);
      qc = svd.matrixU().rightCols(n - r);
    }
    std::vector<CMat> induced(n);
    for (int i = 0; i < n; ++i) induced[i] = qc.adjoint() * g.ad(i).cast<std::complex<double>>() * qc;
    CVec v = detail::common_eigenvector(induced, rng, tol_abs);
    // Residual check: v must be a joint eigenvector of the induced family.
    for (int i = 0; i < n; ++i) {
      std::complex<double> lam = v.dot(induced[i] * v);
      double res = (induced[i] * v - lam * v).norm();
      if (res > std::max(1e-7, 1e-7 * (1.0 + induced[i].norm())))
        throw NumericError("triangularization-failed", "common eigenvector residual too large",
                           res);
    }
    CMat next(n, r + 1);
    next << flag, qc * v;
    flag = next;
  }

  // Weights: diagonal entries of the ad matrices in the flag basis.
  {
    Eigen::JacobiSVD<CMat> svd(flag);
    double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (!(cond < 1e12))
      throw NumericError("triangularization-failed", "flag basis is numerically singular", cond);
  }
  CMat flag_inv = flag.inverse();
  Mat weight_rows(2 * n, n);
  for (int i = 0; i < n; ++i) {
    CMat t = flag_inv * g.ad(i).cast<std::complex<double>>() * flag;
    for (int rrow = 0; rrow < n; ++rrow) {
      weight_rows(2 * rrow, i) = t(rrow, rrow).real();
      weight_rows(2 * rrow + 1, i) = t(rrow, rrow).imag();
    }
  }
  // Snap tiny weights to zero so the kernel is crisp.
  for (int a = 0; a < weight_rows.rows(); ++a)
    for (int b = 0; b < weight_rows.cols(); ++b)
      if (std::abs(weight_rows(a, b)) < 1e-8 * scale) weight_rows(a, b) = 0.0;

  Subspace nil(n, linalg::kernel(weight_rows));

  // The result must be a nilpotent ideal containing [g, g].
  if (!is_ideal(g, nil, 1e-8))
    throw NumericError("nilradical-verification", "computed nilradical is not an ideal");
  InducedAlgebra sub = subalgebra_structure(g, nil, 1e-8);
  if (!sub.algebra.is_nilpotent())
    throw NumericError("nilradical-verification", "computed nilradical is not nilpotent");
  if (!nil.contains(derived_subalgebra(g), 1e-8))
    throw NumericError("nilradical-verification", "computed nilradical misses [g, g]");
  return nil;
}

/// Accepts a user-supplied candidate basis in place of the computation,
/// verifying it is an ideal, nilpotent, and contains [g, g].
inline Subspace nilradical(const LieAlgebra& g, const Mat& candidate_basis) {
  if (!g.is_solvable())
    throw HypothesisError("not-solvable", "nilradical requires a solvable algebra");
  Subspace cand(g.dim(), candidate_basis);
  if (!is_ideal(g, cand, 1e-8))
    throw HypothesisError("not-an-ideal", "candidate nilradical is not an ideal");
  InducedAlgebra sub = subalgebra_structure(g, cand, 1e-8);
  if (!sub.algebra.is_nilpotent())
    throw HypothesisError("not-nilpotent", "candidate nilradical is not nilpotent");
  if (!cand.contains(derived_subalgebra(g), 1e-8))
    throw HypothesisError("not-an-ideal", "candidate nilradical does not contain [g, g]");
  return cand;
}

/// Smallest subspace containing `seed`, closed under the bracket with itself
/// and under each extra linear map. Fixed-point iteration on rank; monotone
/// and idempotent.
inline Subspace bracket_saturate(const LieAlgebra& g, const Subspace& seed,
                                 const std::vector<Mat>& extra_maps = {}) {
  Subspace s = seed;
  for (;;) {
    int before = s.dim();
    Mat cand(g.dim(), s.dim() * s.dim() + static_cast<int>(extra_maps.size()) * s.dim() + s.dim());
    int c = 0;
    for (int i = 0; i < s.dim(); ++i) cand.col(c++) = s.basis().col(i);
    for (int i = 0; i < s.dim(); ++i)
      for (int j = 0; j < s.dim(); ++j)
        cand.col(c++) = g.bracket(s.basis().col(i), s.basis().col(j));
    for (const auto& m : extra_maps)
      for (int i = 0; i < s.dim(); ++i) cand.col(c++) = m * s.basis().col(i);
    s = Subspace(g.dim(), cand.leftCols(c));
    if (s.dim() == before) return s;
  }
}

}  // namespace solvctrl
