#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "solvctrl/derivation.hpp"
#include "solvctrl/nilgroup.hpp"

namespace solvctrl {

/// Box control range Omega = prod [-rho_j, rho_j] with 0 in its interior.
class ControlRange {
 public:
  ControlRange() = default;
  explicit ControlRange(std::vector<double> radii) : radii_(std::move(radii)) {
    for (double r : radii_)
      if (!(r > 0.0))
        throw HypothesisError("control-range", "all box radii must be positive");
  }
  int channels() const { return static_cast<int>(radii_.size()); }
  const std::vector<double>& radii() const { return radii_; }
  bool contains(const Vec& u, double slack = 1e-12) const {
    if (u.size() != channels()) return false;
    for (int j = 0; j < channels(); ++j)
      if (std::abs(u(j)) > radii_[j] + slack) return false;
    return true;
  }

 private:
  std::vector<double> radii_;
};

struct ControlPiece {
  double duration;
  Vec value;
};

/// Piecewise-constant control law on [0, S].
class ControlLaw {
 public:
  ControlLaw() = default;

  static ControlLaw constant(double duration, const Vec& value) {
    ControlLaw u;
    u.append(duration, value);
    return u;
  }

  static ControlLaw zero(double duration, int channels) {
    return constant(duration, Vec::Zero(channels));
  }

  void append(double duration, const Vec& value) {
    if (!(duration > 0.0)) throw std::invalid_argument("piece duration must be positive");
    pieces_.push_back({duration, value});
  }

  const std::vector<ControlPiece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double total_time() const {
    double s = 0.0;
    for (const auto& p : pieces_) s += p.duration;
    return s;
  }

  Vec value_at(double t) const {
    double acc = 0.0;
    for (const auto& p : pieces_) {
      acc += p.duration;
      if (t < acc) return p.value;
    }
    return pieces_.empty() ? Vec() : pieces_.back().value;
  }

  /// a followed by b.
  static ControlLaw concatenate(const ControlLaw& a, const ControlLaw& b) {
    ControlLaw out = a;
    for (const auto& p : b.pieces_) out.pieces_.push_back(p);
    return out;
  }

  /// Time-reversed law (pieces in reverse order).
  ControlLaw reversed() const {
    ControlLaw out;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) out.pieces_.push_back(*it);
    return out;
  }

 private:
  std::vector<ControlPiece> pieces_;
};

inline void validate_law(const ControlLaw& u, const ControlRange& range) {
  for (const auto& p : u.pieces())
    if (!range.contains(p.value))
      throw HypothesisError("control-out-of-range", "law value outside the control box");
}

struct SolveOptions {
  // fast: fixed-step RK4 without Richardson verification, for search loops.
  // Certificates and oracles always use the strict mode.
  bool fast = false;
};

namespace detail {

/// Fixed-step RK4 with step halving until two refinements agree to 1e-9.
template <typename Rhs>
Vec rk4_piece(const Rhs& rhs, const Vec& x0, double duration, bool fast) {
  auto run = [&](long steps) {
    Vec x = x0;
    double h = duration / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      Vec k1 = rhs(x);
      Vec k2 = rhs(x + 0.5 * h * k1);
      Vec k3 = rhs(x + 0.5 * h * k2);
      Vec k4 = rhs(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
  };
  if (duration == 0.0) return x0;
  long n = std::max<long>(32, static_cast<long>(std::ceil(duration / 1e-2)));
  if (fast) return run(std::max<long>(24, static_cast<long>(std::ceil(duration / 0.04))));
  Vec prev = run(n);
  for (;;) {
    n *= 2;
    if (duration / static_cast<double>(n) < 1e-12 * std::max(1.0, duration))
      throw NumericError("step-size-underflow", "integration step fell below the floor");
    Vec cur = run(n);
    if ((cur - prev).norm() <= 1e-9 * (1.0 + cur.norm())) return cur;
    prev = cur;
  }
}

}  // namespace detail

/// Control-affine system on the simply connected nilpotent group (n, *):
///   dx/dt = D(u) x + sum_j u_j Z_j(x),  D(u) = D0 + sign * sum_j u_j D_j.
class SigmaASystem {
 public:
  SigmaASystem(LieAlgebra algebra, Mat d0, std::vector<Mat> dj, std::vector<Vec> zj,
               ControlRange range, double sign_convention = +1.0)
      : algebra_(std::move(algebra)),
        d0_(std::move(d0)),
        dj_(std::move(dj)),
        zj_(std::move(zj)),
        range_(std::move(range)),
        sign_(sign_convention) {
    if (!algebra_.is_nilpotent())
      throw HypothesisError("not-nilpotent", "the state group must be nilpotent");
    if (sign_ != 1.0 && sign_ != -1.0)
      throw std::invalid_argument("sign convention must be +1 or -1");
    if (static_cast<int>(dj_.size()) != range_.channels() ||
        static_cast<int>(zj_.size()) != range_.channels())
      throw std::invalid_argument("control channel count mismatch");
    if (!leibniz_check(d0_, algebra_).pass)
      throw HypothesisError("not-a-derivation", "drift matrix fails the Leibniz rule");
    for (const auto& m : dj_)
      if (!leibniz_check(m, algebra_).pass)
        throw HypothesisError("not-a-derivation", "a control derivation fails the Leibniz rule");
    for (const auto& z : zj_)
      if (z.size() != algebra_.dim())
        throw std::invalid_argument("control vector dimension mismatch");
  }

  const LieAlgebra& algebra() const { return algebra_; }
  const Mat& drift() const { return d0_; }
  const std::vector<Mat>& control_derivations() const { return dj_; }
  const std::vector<Vec>& control_vectors() const { return zj_; }
  const ControlRange& range() const { return range_; }
  double sign_convention() const { return sign_; }
  int dim() const { return algebra_.dim(); }
  int channels() const { return range_.channels(); }

  /// D(u) = D0 + sign * sum u_j D_j.
  Mat control_matrix(const Vec& u) const {
    Mat m = d0_;
    for (int j = 0; j < channels(); ++j)
      if (u(j) != 0.0) m += sign_ * u(j) * dj_[j];
    return m;
  }

  Vec rhs(const Vec& x, const Vec& u) const {
    Vec zu = Vec::Zero(dim());
    for (int j = 0; j < channels(); ++j)
      if (u(j) != 0.0) zu += u(j) * zj_[j];
    return control_matrix(u) * x + right_invariant_field(algebra_, zu, x);
  }

  /// System with the negated vector fields (time reversal).
  SigmaASystem reversed() const {
    std::vector<Mat> dj = dj_;
    for (auto& m : dj) m = -m;
    std::vector<Vec> zj = zj_;
    for (auto& z : zj) z = -z;
    return SigmaASystem(algebra_, -d0_, std::move(dj), std::move(zj), range_, sign_);
  }

  Vec solve(const Vec& x, const ControlLaw& u, const SolveOptions& opts = {}) const;

 private:
  LieAlgebra algebra_;
  Mat d0_;
  std::vector<Mat> dj_;
  std::vector<Vec> zj_;
  ControlRange range_;
  double sign_;
};

namespace detail {

/// Time-ordered product of matrix exponentials, uncertified.
inline Mat flow_matrix(const SigmaASystem& sys, const ControlLaw& u) {
  Mat phi = Mat::Identity(sys.dim(), sys.dim());
  for (const auto& p : u.pieces())
    phi = (p.duration * sys.control_matrix(p.value)).exp() * phi;
  return phi;
}

}  // namespace detail

/// Solution automorphism of the associated linear system Sigma^B:
/// Phi = e^{t_r D(u_r)} ... e^{t_1 D(u_1)}, certified to preserve brackets.
inline GroupAutomorphism flow_B(const SigmaASystem& sys, const ControlLaw& u) {
  validate_law(u, sys.range());
  return GroupAutomorphism(sys.algebra(), detail::flow_matrix(sys, u));
}

/// phi^A(S, 0, u): per-piece RK4 from the identity, composed by the cocycle
/// phi^A(t1+t2, 0) = phi^A(t2, 0, u2) * Phi^B_{t2,u2}(phi^A(t1, 0, u1)).
inline Vec solve_A_from_identity(const SigmaASystem& sys, const ControlLaw& u,
                                 const SolveOptions& opts = {}) {
  validate_law(u, sys.range());
  Vec a = Vec::Zero(sys.dim());
  for (const auto& p : u.pieces()) {
    Vec a_piece = detail::rk4_piece(
        [&](const Vec& x) { return sys.rhs(x, p.value); }, Vec::Zero(sys.dim()), p.duration,
        opts.fast);
    Mat phi_piece = (p.duration * sys.control_matrix(p.value)).exp();
    a = bch_product(sys.algebra(), a_piece, phi_piece * a);
  }
  return a;
}

/// phi^A(S, x, u) = phi^A(S, 0, u) * Phi^B_{S,u}(x). Must agree with direct
/// integration from x (the translation-identity test).
inline Vec solve_A(const SigmaASystem& sys, const Vec& x, const ControlLaw& u,
                   const SolveOptions& opts = {}) {
  Vec a = solve_A_from_identity(sys, u, opts);
  return bch_product(sys.algebra(), a, detail::flow_matrix(sys, u) * x);
}

inline Vec SigmaASystem::solve(const Vec& x, const ControlLaw& u,
                               const SolveOptions& opts) const {
  return solve_A(*this, x, u, opts);
}

/// Independent one-shot RK4 of the full law from x (the oracle path).
inline Vec integrate_direct(const SigmaASystem& sys, const Vec& x, const ControlLaw& u,
                            const SolveOptions& opts = {}) {
  validate_law(u, sys.range());
  Vec cur = x;
  for (const auto& p : u.pieces())
    cur = detail::rk4_piece([&](const Vec& y) { return sys.rhs(y, p.value); }, cur, p.duration,
                            opts.fast);
  return cur;
}

// ---------------------------------------------------------------------------
// Product system on V x n
// ---------------------------------------------------------------------------

/// Cartesian of a linear control system with nilpotent drift A on V and a
/// SigmaA system on the nilpotent group. States are stacked (v, x).
class ProductSystem {
 public:
  ProductSystem(int v_dim, Mat a, std::vector<Vec> b, SigmaASystem inner)
      : v_dim_(v_dim), a_(std::move(a)), b_(std::move(b)), inner_(std::move(inner)) {
    if (a_.rows() != v_dim_ || a_.cols() != v_dim_)
      throw std::invalid_argument("V drift dimension mismatch");
    if (static_cast<int>(b_.size()) != inner_.channels())
      throw std::invalid_argument("V control vector count mismatch");
    for (const auto& v : b_)
      if (v.size() != v_dim_) throw std::invalid_argument("V control vector dimension mismatch");
    if (v_dim_ > 0) {
      Mat apow = Mat::Identity(v_dim_, v_dim_);
      for (int i = 0; i < v_dim_; ++i) apow = apow * a_;
      double scale = std::pow(std::max(1.0, a_.norm()), v_dim_);
      if (apow.norm() > 1e-9 * scale)
        throw HypothesisError("a-not-nilpotent", "the V drift must be nilpotent");
    }
  }

  int v_dim() const { return v_dim_; }
  const Mat& v_drift() const { return a_; }
  const std::vector<Vec>& v_controls() const { return b_; }
  const SigmaASystem& inner() const { return inner_; }
  int dim() const { return v_dim_ + inner_.dim(); }
  int channels() const { return inner_.channels(); }
  const ControlRange& range() const { return inner_.range(); }

  Vec v_part(const Vec& s) const { return s.head(v_dim_); }
  Vec x_part(const Vec& s) const { return s.tail(inner_.dim()); }
  Vec join(const Vec& v, const Vec& x) const {
    Vec s(dim());
    s << v, x;
    return s;
  }

  /// Nilpotent exponential series e^{tA} (finite, exact).
  Mat v_exp(double t) const {
    Mat e = Mat::Identity(v_dim_, v_dim_);
    Mat term = Mat::Identity(v_dim_, v_dim_);
    for (int j = 1; j < v_dim_; ++j) {
      term = term * (t * a_) / static_cast<double>(j);
      e += term;
    }
    return e;
  }

  /// int_0^t e^{sA} ds (finite series).
  Mat v_exp_integral(double t) const {
    Mat f = Mat::Zero(v_dim_, v_dim_);
    Mat apow = Mat::Identity(v_dim_, v_dim_);
    double tpow = t;
    double fact = 1.0;
    for (int j = 0; j < v_dim_; ++j) {
      fact *= static_cast<double>(j + 1);
      f += apow * (tpow / fact);
      apow = apow * a_;
      tpow *= t;
    }
    return f;
  }

  /// First component by exact variation of constants, second by solve_A.
  Vec solve(const Vec& state, const ControlLaw& u, const SolveOptions& opts = {}) const {
    validate_law(u, range());
    Vec v = v_part(state);
    for (const auto& p : u.pieces()) {
      Vec bu = Vec::Zero(v_dim_);
      for (int j = 0; j < channels(); ++j)
        if (p.value(j) != 0.0) bu += p.value(j) * b_[j];
      v = v_exp(p.duration) * v + v_exp_integral(p.duration) * bu;
    }
    Vec x = solve_A(inner_, x_part(state), u, opts);
    return join(v, x);
  }

  ProductSystem reversed() const {
    std::vector<Vec> b = b_;
    for (auto& v : b) v = -v;
    return ProductSystem(v_dim_, -a_, std::move(b), inner_.reversed());
  }

  Vec rhs(const Vec& state, const Vec& u) const {
    Vec v = v_part(state), x = x_part(state);
    Vec bu = Vec::Zero(v_dim_);
    for (int j = 0; j < channels(); ++j)
      if (u(j) != 0.0) bu += u(j) * b_[j];
    return join(a_ * v + bu, inner_.rhs(x, u));
  }

 private:
  int v_dim_;
  Mat a_;
  std::vector<Vec> b_;
  SigmaASystem inner_;
};

/// Independent full-state RK4 oracle for the product system.
inline Vec integrate_direct(const ProductSystem& sys, const Vec& state, const ControlLaw& u,
                            const SolveOptions& opts = {}) {
  validate_law(u, sys.range());
  Vec cur = state;
  for (const auto& p : u.pieces())
    cur = detail::rk4_piece([&](const Vec& y) { return sys.rhs(y, p.value); }, cur, p.duration,
                            opts.fast);
  return cur;
}

// ---------------------------------------------------------------------------
// Semidirect reduction of a linear control system on a solvable group
// ---------------------------------------------------------------------------

/// Linear control system on a solvable group in algebra data: drift
/// derivation D and right-invariant control vectors Y_j.
struct SemidirectLCS {
  LieAlgebra g;
  Mat d;  // derivation of g (validated on use)
  std::vector<Vec> yj;
  ControlRange range;
};

/// Coordinates of the reduced model: bases of g0 and n, the inner algebra
/// structure in the n-basis, and the semidirect group law machinery.
struct SemidirectModel {
  LieAlgebra g;
  Mat b0;  // dim x v_dim basis of g0
  Mat bn;  // dim x n_dim basis of n
  LieAlgebra inner;
  KernelSplit split;

  int v_dim() const { return static_cast<int>(b0.cols()); }
  int n_dim() const { return static_cast<int>(bn.cols()); }

  /// ad(B0 v) restricted to n, in n-coordinates.
  Mat ad_on_n(const Vec& v) const {
    return bn.transpose() * g.ad(Vec(b0 * v)) * bn;
  }

  /// rho(exp Y) = e^{ad(Y)|n}.
  Mat rho(const Vec& v) const { return ad_on_n(v).exp(); }

  /// Semidirect group law (g1, X1)(g2, X2) = (g1 + g2, X1 * rho(g1) X2);
  /// G0 is abelian here (n0 = 0), so the first factor is additive.
  std::pair<Vec, Vec> product(const std::pair<Vec, Vec>& p1,
                              const std::pair<Vec, Vec>& p2) const {
    return {p1.first + p2.first, bch_product(inner, p1.second, Vec(rho(p1.first) * p2.second))};
  }

  /// Right-invariant field (Y, Z) at (h, x): (Y, Z(x) + ad(Y)|n x).
  std::pair<Vec, Vec> invariant_field(const Vec& y, const Vec& z,
                                      const std::pair<Vec, Vec>& at) const {
    return {y, right_invariant_field(inner, z, at.second) + ad_on_n(y) * at.second};
  }

  /// Residual between the closed-form field and a central finite difference
  /// of s -> (sY, sZ) . (h, x).
  double field_check(const Vec& y, const Vec& z, const std::pair<Vec, Vec>& at,
                     double h = 1e-5) const {
    auto plus = product({h * y, h * z}, at);
    auto minus = product({-h * y, -h * z}, at);
    Vec fd_v = (plus.first - minus.first) / (2 * h);
    Vec fd_x = (plus.second - minus.second) / (2 * h);
    auto cf = invariant_field(y, z, at);
    return std::max((fd_v - cf.first).norm(), (fd_x - cf.second).norm());
  }
};

struct SemidirectBuild {
  ProductSystem system;
  SemidirectModel model;
};

/// Theorem-style reduction: g = g0 (+) n when n0 = 0, V = g0 with nilpotent
/// A = D|_{g0}, inner SigmaA system on n with D0 = D|_n invertible,
/// D_j = ad(Y_j^0)|_n, Z_j = n-component of Y_j, b_j = g0-component.
inline SemidirectBuild build_semidirect(const SemidirectLCS& sd) {
  if (!sd.g.is_solvable())
    throw HypothesisError("not-solvable", "the reduction requires a solvable algebra");
  Derivation d(sd.g, sd.d);
  KernelSplit ks = kernel_split(sd.g, d);
  if (ks.n0.dim() != 0)
    throw HypothesisError(
        "n0-not-trivial",
        "N0 has dimension " + std::to_string(ks.n0.dim()) +
            ": the compactness hypothesis is not certifiable in the simply connected model");

  const Mat b0 = ks.g0.basis();
  const Mat bn = ks.n.basis();
  const int vd = ks.g0.dim(), nd = ks.n.dim();
  if (vd + nd != sd.g.dim())
    throw NumericError("direct-sum-failed", "g0 (+) n does not fill the algebra");

  // A = D restricted to g0 (invariance verified).
  Mat a = b0.transpose() * sd.d * b0;
  if ((sd.d * b0 - b0 * a).norm() > 1e-8 * std::max(1.0, sd.d.norm()))
    throw NumericError("direct-sum-failed", "g0 is not D-invariant");

  // D0 = D restricted to n, invertible since n0 = 0.
  Mat d0 = bn.transpose() * sd.d * bn;
  if ((sd.d * bn - bn * d0).norm() > 1e-8 * std::max(1.0, sd.d.norm()))
    throw NumericError("direct-sum-failed", "n is not D-invariant");
  if (std::abs(d0.determinant()) <= 1e-10 * std::max(1.0, std::pow(d0.norm(), nd)))
    throw HypothesisError("d0-singular", "D restricted to the nilradical is singular");

  LieAlgebra inner = subalgebra_structure(sd.g, ks.n).algebra;

  // Split each control vector along g0 (+) n.
  Mat full(sd.g.dim(), sd.g.dim());
  full << b0, bn;
  Mat full_inv = full.inverse();
  std::vector<Vec> bj, zj;
  std::vector<Mat> dj;
  for (const auto& y : sd.yj) {
    if (y.size() != sd.g.dim()) throw std::invalid_argument("control vector dimension mismatch");
    Vec coords = full_inv * y;
    Vec alpha = coords.head(vd);
    Vec beta = coords.tail(nd);
    bj.push_back(alpha);
    zj.push_back(beta);
    Vec y0 = b0 * alpha;
    Mat ady = sd.g.ad(y0);
    Mat dj_mat = bn.transpose() * ady * bn;
    if ((ady * bn - bn * dj_mat).norm() > 1e-8 * std::max(1.0, ady.norm()))
      throw NumericError("direct-sum-failed", "ad(Y0) does not preserve n");
    dj.push_back(dj_mat);
  }

  SigmaASystem sigma(inner, d0, std::move(dj), std::move(zj), sd.range, +1.0);
  ProductSystem ps(vd, a, std::move(bj), std::move(sigma));
  return {std::move(ps), SemidirectModel{sd.g, b0, bn, inner, ks}};
}

// ---------------------------------------------------------------------------
// Time rescaling (speed laws)
// ---------------------------------------------------------------------------

/// Piecewise-linear increasing time map tau(t) = int_0^t v.
class TimeMap {
 public:
  TimeMap() : TimeMap({0.0, 1.0}, {1.0}) {}  // identity placeholder
  TimeMap(std::vector<double> t_breaks, std::vector<double> slopes)
      : t_(std::move(t_breaks)), v_(std::move(slopes)) {
    tau_.resize(t_.size());
    tau_[0] = 0.0;
    for (size_t i = 1; i < t_.size(); ++i)
      tau_[i] = tau_[i - 1] + v_[i - 1] * (t_[i] - t_[i - 1]);
  }

  double operator()(double t) const {
    size_t i = segment(t_, t);
    return tau_[i] + v_[i] * (t - t_[i]);
  }
  double inverse(double s) const {
    size_t i = segment(tau_, s);
    return t_[i] + (s - tau_[i]) / v_[i];
  }
  double domain_end() const { return t_.back(); }
  double range_end() const { return tau_.back(); }

 private:
  static size_t segment(const std::vector<double>& xs, double x) {
    size_t i = 0;
    while (i + 2 < xs.size() && x >= xs[i + 1]) ++i;
    return i;
  }
  std::vector<double> t_, tau_;
  std::vector<double> v_;
};

struct RescaledLaw {
  ControlLaw law;  // u(t) = u_alpha(tau(t))
  TimeMap tau;
};

/// Reparametrize u_alpha by a piecewise-constant speed law v with values in
/// (1/alpha, alpha): tau(t) = int_0^t v and u = u_alpha o tau. The law u
/// covers exactly the preimage of u_alpha's horizon; v must last at least
/// that long.
inline RescaledLaw rescale_control(const ControlLaw& u_alpha, const ControlLaw& v,
                                   double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (v.empty() || u_alpha.empty()) throw std::invalid_argument("empty law");
  for (const auto& p : v.pieces()) {
    if (p.value.size() != 1) throw std::invalid_argument("speed law must be scalar");
    if (!(p.value(0) > 1.0 / alpha && p.value(0) < alpha))
      throw HypothesisError("v-out-of-range", "speed values must lie in (1/alpha, alpha)");
  }

  const double total_alpha = u_alpha.total_time();
  std::vector<double> t_breaks{0.0}, slopes;
  double t = 0.0, s = 0.0;
  for (const auto& p : v.pieces()) {
    t_breaks.push_back(t + p.duration);
    slopes.push_back(p.value(0));
    t += p.duration;
    s += p.duration * p.value(0);
  }
  if (s + 1e-12 < total_alpha)
    throw HypothesisError("v-out-of-range",
                          "speed law is too short to cover the base horizon");
  TimeMap tau(t_breaks, slopes);

  // Merge breakpoints: v's own and the preimages of u_alpha's.
  std::vector<double> cuts{0.0};
  for (size_t i = 1; i < t_breaks.size(); ++i)
    if (tau(t_breaks[i]) < total_alpha - 1e-15) cuts.push_back(t_breaks[i]);
  double acc = 0.0;
  for (const auto& p : u_alpha.pieces()) {
    acc += p.duration;
    if (acc < total_alpha - 1e-15) cuts.push_back(tau.inverse(acc));
  }
  cuts.push_back(tau.inverse(total_alpha));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());

  ControlLaw u;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    u.append(cuts[i + 1] - cuts[i], u_alpha.value_at(tau(mid)));
  }
  return {std::move(u), std::move(tau)};
}

}  // namespace solvctrl
