#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "solvctrl/algebra.hpp"
#include "solvctrl/errors.hpp"
#include "solvctrl/linalg.hpp"
#include "solvctrl/tolerances.hpp"

namespace solvctrl {

struct LeibnizReport {
  double max_residual = 0.0;
  bool pass = false;
};

/// Max over basis pairs of |D[x,y] - [Dx,y] - [x,Dy]|.
inline LeibnizReport leibniz_check(const Mat& d, const LieAlgebra& g) {
  if (d.rows() != g.dim() || d.cols() != g.dim())
    throw std::invalid_argument("derivation matrix dimension does not match algebra");
  LeibnizReport rep;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i + 1; j < g.dim(); ++j) {
      Vec ei = Vec::Unit(g.dim(), i), ej = Vec::Unit(g.dim(), j);
      Vec r = d * g.bracket(ei, ej) - g.bracket(d * ei, ej) - g.bracket(ei, d * ej);
      rep.max_residual = std::max(rep.max_residual, r.cwiseAbs().maxCoeff());
    }
  double scale = std::max(1.0, d.cwiseAbs().maxCoeff()) * std::max(1.0, g.structure_scale());
  rep.pass = rep.max_residual <= tol::alg * scale;
  return rep;
}

/// Linear endomorphism satisfying the Leibniz rule on its algebra;
/// construction refuses anything else.
class Derivation {
 public:
  Derivation(const LieAlgebra& g, Mat matrix) : matrix_(std::move(matrix)) {
    LeibnizReport rep = leibniz_check(matrix_, g);
    residual_ = rep.max_residual;
    if (!rep.pass)
      throw HypothesisError("not-a-derivation",
                            "Leibniz residual " + std::to_string(rep.max_residual));
  }

  const Mat& matrix() const { return matrix_; }
  double leibniz_residual() const { return residual_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  Mat matrix_;
  double residual_;
};

/// Basis of the derivation space of g: the null space of the linear Leibniz
/// constraints. Useful for sampling certified random derivations.
inline std::vector<Mat> derivation_basis(const LieAlgebra& g) {
  const int n = g.dim();
  if (n == 0) return {};
  int pairs = n * (n - 1) / 2;
  Mat a = Mat::Zero(std::max(1, pairs * n), n * n);
  int row0 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec w = g.bracket(Vec::Unit(n, i), Vec::Unit(n, j));
      for (int k = 0; k < n; ++k) {
        for (int b = 0; b < n; ++b) a(row0 + k, b * n + k) += w(b);
        for (int l = 0; l < n; ++l) {
          a(row0 + k, i * n + l) += g.ad(j)(k, l);   // +[e_j, M e_i] = -[M e_i, e_j]
          a(row0 + k, j * n + l) -= g.ad(i)(k, l);   // -[e_i, M e_j]
        }
      }
      row0 += n;
    }
  Mat ker = linalg::kernel(a);
  std::vector<Mat> basis;
  for (int c = 0; c < ker.cols(); ++c)
    basis.push_back(Eigen::Map<const Mat>(ker.col(c).data(), n, n));
  return basis;
}

// ---------------------------------------------------------------------------
// Additive Jordan decomposition D = H + E + N
// ---------------------------------------------------------------------------

struct JordanParts {
  Mat hyperbolic;  // real semisimple
  Mat elliptic;    // imaginary semisimple
  Mat nilpotent;
  std::vector<std::complex<double>> cluster_centers;
  std::vector<int> cluster_multiplicities;
};

namespace detail {

/// Newton coefficients for Hermite interpolation with all derivative
/// conditions zero: nodes repeated by multiplicity, value v_j at node j.
inline std::vector<std::complex<double>> hermite_newton_coeffs(
    const std::vector<std::complex<double>>& nodes_rep,
    const std::vector<std::complex<double>>& values_rep,
    const std::vector<bool>& is_repeat) {
  const int n = static_cast<int>(nodes_rep.size());
  // dd[i] holds the divided difference f[x_i..x_{i+k}] at stage k.
  std::vector<std::complex<double>> dd(values_rep);
  std::vector<std::complex<double>> coeffs(n);
  coeffs[0] = dd[0];
  for (int k = 1; k < n; ++k) {
    for (int i = 0; i + k < n; ++i) {
      if (nodes_rep[i] == nodes_rep[i + k]) {
        dd[i] = 0.0;  // derivative conditions are all zero
      } else {
        dd[i] = (dd[i + 1] - dd[i]) / (nodes_rep[i + k] - nodes_rep[i]);
      }
    }
    coeffs[k] = dd[0];
  }
  (void)is_repeat;
  return coeffs;
}

/// Evaluate the Newton-form polynomial at a matrix argument.
inline CMat newton_eval(const std::vector<std::complex<double>>& coeffs,
                        const std::vector<std::complex<double>>& nodes_rep, const CMat& d) {
  const int n = static_cast<int>(coeffs.size());
  const int m = static_cast<int>(d.rows());
  CMat r = coeffs[n - 1] * CMat::Identity(m, m);
  for (int k = n - 2; k >= 0; --k)
    r = r * (d - nodes_rep[k] * CMat::Identity(m, m)) + coeffs[k] * CMat::Identity(m, m);
  return r;
}

struct EigCluster {
  std::complex<double> center;
  int multiplicity;
};

/// Greedy transitive clustering of eigenvalues at radius `tol`, conjugate
/// symmetric, with tiny real/imaginary parts of the centers snapped to zero.
inline std::vector<EigCluster> cluster_eigenvalues(const CVec& eig, double tol_eig) {
  const int n = static_cast<int>(eig.size());
  std::vector<int> owner(n, -1);
  std::vector<EigCluster> clusters;
  for (int i = 0; i < n; ++i) {
    if (owner[i] >= 0) continue;
    std::vector<int> members{i};
    owner[i] = static_cast<int>(clusters.size());
    bool grew = true;
    while (grew) {
      grew = false;
      for (int j = 0; j < n; ++j) {
        if (owner[j] >= 0) continue;
        for (int m : members)
          if (std::abs(eig(j) - eig(m)) <= tol_eig) {
            owner[j] = owner[i];
            members.push_back(j);
            grew = true;
            break;
          }
      }
    }
    std::complex<double> c{0.0, 0.0};
    for (int m : members) c += eig(m);
    c /= static_cast<double>(members.size());
    if (std::abs(c.imag()) <= tol_eig) c.imag(0.0);
    if (std::abs(c.real()) <= tol_eig) c.real(0.0);
    clusters.push_back({c, static_cast<int>(members.size())});
  }
  // Force exact conjugate symmetry of the centers.
  for (auto& cl : clusters) {
    if (cl.center.imag() <= 0.0) continue;
    for (auto& other : clusters)
      if (other.center.imag() < 0.0 &&
          std::abs(std::conj(other.center) - cl.center) <= 2 * tol_eig) {
        std::complex<double> c = 0.5 * (cl.center + std::conj(other.center));
        cl.center = c;
        other.center = std::conj(c);
      }
  }
  return clusters;
}

}  // namespace detail

/// Additive Jordan decomposition of a derivation. Eigenvalues are clustered
/// at tol_eig = 1e-7 * |D|; on each generalized eigenspace the hyperbolic
/// part acts by Re(lambda), the elliptic part by the rotation, and the
/// nilpotent part takes the remainder. All three parts are polynomials in D,
/// so the commutation relations hold by construction; each part is verified
/// to be a derivation.
inline JordanParts jordan_decomposition(const LieAlgebra& g, const Derivation& d) {
  const Mat& m = d.matrix();
  const int n = d.dim();
  JordanParts out;
  if (n == 0) return out;
  double scale = std::max(1.0, m.norm());
  double tol_eig = tol::eig_rel * scale;

  Eigen::EigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    throw NumericError("eigensolver-failed", "eigenvalue computation did not converge");
  auto clusters = detail::cluster_eigenvalues(es.eigenvalues(), tol_eig);

  for (size_t a = 0; a < clusters.size(); ++a)
    for (size_t b = a + 1; b < clusters.size(); ++b)
      if (std::abs(clusters[a].center - clusters[b].center) < 10 * tol_eig)
        throw NumericError("clustering-ambiguous",
                           "two eigenvalue clusters are closer than 10x the clustering radius",
                           std::abs(clusters[a].center - clusters[b].center));

  std::vector<std::complex<double>> nodes, sval, hval;
  std::vector<bool> rep;
  for (const auto& cl : clusters) {
    out.cluster_centers.push_back(cl.center);
    out.cluster_multiplicities.push_back(cl.multiplicity);
    for (int r = 0; r < cl.multiplicity; ++r) {
      nodes.push_back(cl.center);
      sval.push_back(cl.center);
      hval.push_back(cl.center.real());
      rep.push_back(r > 0);
    }
  }
  auto cs = detail::hermite_newton_coeffs(nodes, sval, rep);
  auto ch = detail::hermite_newton_coeffs(nodes, hval, rep);
  CMat dc = m.cast<std::complex<double>>();
  CMat s = detail::newton_eval(cs, nodes, dc);
  CMat h = detail::newton_eval(ch, nodes, dc);
  double imag_res = std::max(s.imag().norm(), h.imag().norm());
  if (imag_res > 1e-8 * scale)
    throw NumericError("jordan-verification", "non-real part in the decomposition", imag_res);

  out.hyperbolic = h.real();
  out.elliptic = (s - h).real();
  out.nilpotent = m - s.real();

  // Verification: each part must be a derivation and the expected spectra
  // hold. Reconstruction and commutation are by construction; re-checked in
  // the test suite.
  for (const Mat* part : {&out.hyperbolic, &out.elliptic, &out.nilpotent}) {
    LeibnizReport lr = leibniz_check(*part, g);
    if (!lr.pass)
      throw NumericError("jordan-verification", "a Jordan part fails the Leibniz rule",
                         lr.max_residual);
  }
  Mat npow = out.nilpotent;
  for (int i = 1; i < n; ++i) npow = npow * out.nilpotent;
  if (npow.norm() > 1e-9 * std::pow(std::max(1.0, m.norm()), n))
    throw NumericError("jordan-verification", "nilpotent part is not nilpotent", npow.norm());
  return out;
}

namespace detail {

/// Kernel of m at an absolute singular-value threshold.
inline Mat kernel_at(const Mat& m, double thresh) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thresh) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

/// ker(D^dim) by the invariant-kernel chain K_{i+1} = {x : Dx in span K_i},
/// which keeps every rank decision at the scale of D itself (powering the
/// matrix first would bury small eigenvalues under roundoff).
inline Subspace generalized_kernel_power(const Mat& d, double thresh) {
  const int n = static_cast<int>(d.rows());
  Mat k(n, 0);
  for (int iter = 0; iter < n; ++iter) {
    Mat m = (k.cols() == 0) ? d : Mat(d - k * (k.transpose() * d));
    Mat next = kernel_at(m, thresh);
    if (next.cols() == k.cols()) break;
    k = next;
  }
  return Subspace(n, k);
}

}  // namespace detail

/// Generalized kernel: null space of D^dim, cross-checked against
/// ker(H + E); the two must agree as subspaces.
inline Subspace generalized_kernel(const LieAlgebra& g, const Derivation& d) {
  const int n = d.dim();
  if (n == 0) return Subspace::zero(0);
  double thresh = tol::eig_rel * std::max(1.0, d.matrix().norm());
  Subspace via_power = detail::generalized_kernel_power(d.matrix(), thresh);

  JordanParts jp = jordan_decomposition(g, d);
  Subspace via_semisimple(n, detail::kernel_at(jp.hyperbolic + jp.elliptic, thresh));

  if (via_power.dim() != via_semisimple.dim() ||
      linalg::max_principal_angle(via_power.basis(), via_semisimple.basis()) > 1e-8)
    throw NumericError("generalized-kernel-mismatch",
                       "ker(D^dim) and ker(H+E) disagree as subspaces");
  return via_semisimple;
}

struct KernelSplit {
  Subspace g0;  // generalized kernel of D
  Subspace n;   // nilradical
  Subspace n0;  // n intersect g0
  int dim_n_plus_g0 = 0;
  bool lemma_sum_ok = false;        // dim(n + g0) == dim g
  bool derived_g0_in_n0 = false;    // [g0, g0] contained in n0
};

inline KernelSplit kernel_split(const LieAlgebra& g, const Derivation& d) {
  KernelSplit ks;
  ks.n = nilradical(g);
  ks.g0 = generalized_kernel(g, d);
  ks.n0 = Subspace::intersect(ks.n, ks.g0);
  ks.dim_n_plus_g0 = Subspace::sum(ks.n, ks.g0).dim();
  ks.lemma_sum_ok = (ks.dim_n_plus_g0 == g.dim());
  Subspace derived_g0(g.dim(), bracket_pairs(g, ks.g0.basis(), ks.g0.basis()));
  ks.derived_g0_in_n0 = ks.n0.contains(derived_g0, 1e-8);
  return ks;
}

enum class CompactnessVerdict { kCompact, kNotCompactInModel };

struct CompactnessReport {
  CompactnessVerdict verdict;
  std::string note;
};

/// In the simply connected model, a connected subgroup of a simply connected
/// nilpotent group is compact only when trivial.
inline CompactnessReport n0_compactness_criterion(const Subspace& n0) {
  if (n0.dim() == 0) return {CompactnessVerdict::kCompact, "N0 is trivial"};
  return {CompactnessVerdict::kNotCompactInModel,
          "dim N0 = " + std::to_string(n0.dim()) +
              ": a nontrivial connected subgroup of a simply connected nilpotent group is "
              "noncompact; torus quotients are out of scope"};
}

/// Smallest n <= nmax with |e^{n S0 D_E} g - g| < eps, or nothing. D_E must
/// be elliptic (verified).
inline std::optional<long> elliptic_recurrence(const LieAlgebra& g, const Derivation& d_e,
                                               const Vec& point, double s0, double eps,
                                               long nmax) {
  JordanParts jp = jordan_decomposition(g, d_e);
  double scale = std::max(1.0, d_e.matrix().norm());
  if (jp.hyperbolic.norm() > 1e-8 * scale || jp.nilpotent.norm() > 1e-8 * scale)
    throw HypothesisError("not-elliptic", "derivation has nonzero hyperbolic or nilpotent part");
  Mat step = (s0 * d_e.matrix()).exp();
  Vec v = point;
  for (long n = 1; n <= nmax; ++n) {
    v = step * v;
    if ((v - point).norm() < eps) return n;
  }
  return std::nullopt;
}

}  // namespace solvctrl
