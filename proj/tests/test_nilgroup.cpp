#include "solvctrl/nilgroup.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "solvctrl/derivation.hpp"
#include "support.hpp"

using namespace solvctrl;
using namespace testsupport;

namespace {

// Independent oracle for class <= 2: x * y = x + y + [x,y]/2, written out
// from the series by hand.
Vec bch_oracle_class2(const LieAlgebra& g, const Vec& x, const Vec& y) {
  return x + y + 0.5 * g.bracket(x, y);
}

// Independent oracle for class <= 3:
// x * y = x + y + [x,y]/2 + [x,[x,y]]/12 + [y,[y,x]]/12.
Vec bch_oracle_class3(const LieAlgebra& g, const Vec& x, const Vec& y) {
  Vec xy = g.bracket(x, y);
  return x + y + 0.5 * xy + (1.0 / 12.0) * g.bracket(x, xy) -
         (1.0 / 12.0) * g.bracket(y, xy);
}

Vec random_vec(int n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
  return v;
}

Mat random_derivation(const std::vector<Mat>& basis, Rng& rng, double scale = 1.0) {
  Mat m = Mat::Zero(basis[0].rows(), basis[0].cols());
  for (const auto& b : basis) m += rng.uniform(-scale, scale) * b;
  return m;
}

// Random certified automorphism with |det(phi - 1)| >= min_gap, generated
// as exp of a random derivation.
GroupAutomorphism random_automorphism(const LieAlgebra& g, const std::vector<Mat>& dbasis,
                                      Rng& rng, double min_gap) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Mat d = random_derivation(dbasis, rng, 2.5);
    Mat phi = d.exp();
    Mat gap = Mat::Identity(g.dim(), g.dim()) - phi;
    if (std::abs(gap.determinant()) >= min_gap) return GroupAutomorphism(g, phi);
  }
  throw std::runtime_error("could not sample an automorphism with the requested det gap");
}

}  // namespace

TEST(BchProduct, HeisenbergAgainstClass2Oracle) {
  LieAlgebra h3 = heisenberg3();
  Vec e1 = unit(3, 0), e2 = unit(3, 1);
  Vec p = bch_product(h3, e1, e2);
  Vec expected(3);
  expected << 1, 1, 0.5;
  EXPECT_LT((p - expected).norm(), 1e-15);
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    Vec x = random_vec(3, rng), y = random_vec(3, rng);
    EXPECT_LT((bch_product(h3, x, y) - bch_oracle_class2(h3, x, y)).norm(), 1e-14);
  }
}

TEST(BchProduct, FiliformAgainstClass3Oracle) {
  LieAlgebra n4 = filiform4();
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    Vec x = random_vec(4, rng), y = random_vec(4, rng);
    EXPECT_LT((bch_product(n4, x, y) - bch_oracle_class3(n4, x, y)).norm(), 1e-13);
  }
}

TEST(BchProduct, IdentityAndInverse) {
  LieAlgebra n4 = filiform4();
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Vec x = random_vec(4, rng);
    EXPECT_LT((bch_product(n4, x, Vec::Zero(4)) - x).norm(), 1e-15);
    EXPECT_LT((bch_product(n4, Vec::Zero(4), x) - x).norm(), 1e-15);
    EXPECT_LT(bch_product(n4, x, group_inverse(x)).norm(), 1e-14);
  }
  Vec v(3);
  v << 1, 2, 3;
  EXPECT_EQ(group_inverse(v), Vec(-v));
}

TEST(BchProduct, Associativity) {
  Rng rng(8);
  for (const LieAlgebra& g : {heisenberg3(), filiform4()}) {
    for (int t = 0; t < 1000; ++t) {
      Vec x = random_vec(g.dim(), rng), y = random_vec(g.dim(), rng),
          z = random_vec(g.dim(), rng);
      Vec left = bch_product(g, bch_product(g, x, y), z);
      Vec right = bch_product(g, x, bch_product(g, y, z));
      double scale = 1.0 + left.norm();
      EXPECT_LT((left - right).norm(), 1e-10 * scale);
    }
  }
}

TEST(BchProduct, NonNilpotentRejected) {
  LieAlgebra g = euclid_like();
  EXPECT_THROW(bch_product(g, Vec::Zero(3), Vec::Zero(3)), HypothesisError);
}

TEST(RightInvariantField, ClosedFormExamples) {
  LieAlgebra h3 = heisenberg3();
  Vec x(3);
  x << 0, 1, 0;
  Vec f = right_invariant_field(h3, unit(3, 0), x);
  Vec expected(3);
  expected << 1, 0, 0.5;
  EXPECT_LT((f - expected).norm(), 1e-15);

  // At the identity the field is Z itself; on an abelian algebra it is Z
  // everywhere.
  Rng rng(9);
  Vec z = random_vec(3, rng);
  EXPECT_LT((right_invariant_field(h3, z, Vec::Zero(3)) - z).norm(), 1e-15);
  LieAlgebra ab = abelian(3);
  EXPECT_LT((right_invariant_field(ab, z, random_vec(3, rng)) - z).norm(), 1e-15);
}

TEST(RightInvariantField, FiniteDifferenceOracle) {
  // Central difference of s -> (sZ) * x pins the Bernoulli sign convention.
  Rng rng(10);
  const double h = 1e-5;
  for (const LieAlgebra& g : {heisenberg3(), filiform4()}) {
    for (int t = 0; t < 200; ++t) {
      Vec z = random_vec(g.dim(), rng), x = random_vec(g.dim(), rng);
      Vec fd = (bch_product(g, h * z, x) - bch_product(g, -h * z, x)) / (2 * h);
      Vec series = right_invariant_field(g, z, x);
      EXPECT_LT((fd - series).norm(), 1e-6);
    }
  }
}

TEST(Automorphism, ExpOfDerivationCertifies) {
  Rng rng(11);
  for (const LieAlgebra& g : {heisenberg3(), filiform4()}) {
    auto basis = derivation_basis(g);
    for (int t = 0; t < 50; ++t) {
      Mat d = random_derivation(basis, rng);
      EXPECT_NO_THROW(GroupAutomorphism(g, d.exp()));
    }
  }
}

TEST(Automorphism, NonAutomorphismRejected) {
  LieAlgebra h3 = heisenberg3();
  Mat bad = Mat::Identity(3, 3);
  bad(2, 2) = 3.0;  // scales the center without scaling [e1, e2]
  EXPECT_THROW(GroupAutomorphism(h3, bad), NumericError);
}

TEST(FPhiApply, Examples) {
  LieAlgebra ab = abelian(2);
  GroupAutomorphism two(ab, 2.0 * Mat::Identity(2, 2));
  Vec x(2);
  x << 3, -1;
  EXPECT_LT((f_phi_apply(ab, two, x) + x).norm(), 1e-15);  // (1 - 2) x = -x

  LieAlgebra h3 = heisenberg3();
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2, 2, 4;
  GroupAutomorphism phi(h3, d);
  EXPECT_LT(f_phi_apply(h3, phi, Vec::Zero(3)).norm(), 1e-15);
  Vec e1 = unit(3, 0);
  EXPECT_LT((f_phi_apply(h3, phi, e1) + e1).norm(), 1e-15);
}

TEST(FPhiInvert, AbelianScalar) {
  LieAlgebra ab = abelian(1);
  GroupAutomorphism two(ab, 2.0 * Mat::Identity(1, 1));
  Vec y(1);
  y << 5;
  Vec x = f_phi_invert(ab, two, y);
  EXPECT_NEAR(x(0), -5.0, 1e-14);
}

TEST(FPhiInvert, ZeroMapsToZero) {
  LieAlgebra h3 = heisenberg3();
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2, 2, 4;
  GroupAutomorphism phi(h3, d);
  Vec x = f_phi_invert(h3, phi, Vec::Zero(3));
  EXPECT_EQ(x.norm(), 0.0);  // exact: every layer solves a zero system
}

TEST(FPhiInvert, HeisenbergExample) {
  LieAlgebra h3 = heisenberg3();
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2, 2, 4;
  GroupAutomorphism phi(h3, d);
  Vec y = unit(3, 0);
  Vec x = f_phi_invert(h3, phi, y);
  Vec expected(3);
  expected << -1, 0, 0;
  EXPECT_LT((x - expected).norm(), 1e-12);
  EXPECT_LT((f_phi_apply(h3, phi, x) - y).norm(), 1e-12);
}

TEST(FPhiInvert, RoundTripProperty) {
  Rng rng(12);
  for (const LieAlgebra& g : {heisenberg3(), filiform4()}) {
    auto basis = derivation_basis(g);
    for (int t = 0; t < 1000; ++t) {
      GroupAutomorphism phi = random_automorphism(g, basis, rng, 0.1);
      Vec x = random_vec(g.dim(), rng);
      Vec y = f_phi_apply(g, phi, x);
      Vec back = f_phi_invert(g, phi, y);
      EXPECT_LT((back - x).norm(), 1e-9 * (1.0 + x.norm()));
      Vec x2 = f_phi_invert(g, phi, x);
      EXPECT_LT((f_phi_apply(g, phi, x2) - x).norm(), 1e-9 * (1.0 + x.norm()));
    }
  }
}

TEST(FPhiInvert, CentralMultiplicativity) {
  // f_phi(x * z) = f_phi(x) * f_phi(z) for central z: the recursion anchor.
  LieAlgebra h3 = heisenberg3();
  auto basis = derivation_basis(h3);
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    GroupAutomorphism phi = random_automorphism(h3, basis, rng, 1e-6);
    Vec x = random_vec(3, rng);
    Vec z = Vec::Zero(3);
    z(2) = rng.uniform(-2, 2);
    Vec lhs = f_phi_apply(h3, phi, bch_product(h3, x, z));
    Vec rhs = bch_product(h3, f_phi_apply(h3, phi, x), f_phi_apply(h3, phi, z));
    EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1.0 + lhs.norm()));
  }
}

TEST(FPhiInvert, DetGapTooSmall) {
  LieAlgebra h3 = heisenberg3();
  GroupAutomorphism id(h3, Mat::Identity(3, 3));
  EXPECT_THROW(f_phi_invert(h3, id, unit(3, 0)), HypothesisError);
}

TEST(CurveInvert, ConstantCurve) {
  LieAlgebra h3 = heisenberg3();
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2, 2, 4;
  std::vector<GroupAutomorphism> phis(5, GroupAutomorphism(h3, d));
  std::vector<GroupPoint> ys(5, unit(3, 0));
  CurveInvertResult r = curve_invert(h3, phis, ys);
  ASSERT_EQ(r.points.size(), 5u);
  for (const auto& e : r.errors) EXPECT_TRUE(e.empty());
  EXPECT_EQ(r.max_jump, 0.0);
}

TEST(CurveInvert, AbelianScalarCurveIsConstantMinusOne) {
  // phi(t) = (1+t) I on R for t in [1,2], y(t) = t: x(t) = t / (1 - (1+t))
  // = -1 for every t.
  LieAlgebra ab = abelian(1);
  std::vector<GroupAutomorphism> phis;
  std::vector<GroupPoint> ys;
  for (int i = 0; i <= 20; ++i) {
    double t = 1.0 + i / 20.0;
    phis.emplace_back(ab, (1.0 + t) * Mat::Identity(1, 1));
    Vec y(1);
    y << t;
    ys.push_back(y);
  }
  CurveInvertResult r = curve_invert(ab, phis, ys);
  for (size_t i = 0; i < r.points.size(); ++i) {
    ASSERT_TRUE(r.errors[i].empty());
    EXPECT_NEAR(r.points[i](0), -1.0, 1e-12);
  }
  EXPECT_LT(r.max_jump, 1e-12);
}

TEST(CurveInvert, HeisenbergContinuityScan) {
  LieAlgebra h3 = heisenberg3();
  std::vector<GroupAutomorphism> phis;
  std::vector<GroupPoint> ys;
  Vec y(3);
  y << 0.3, -0.2, 0.5;
  // t in [1, 2] keeps det(phi - 1) bounded away from zero along the curve.
  for (int i = 0; i <= 50; ++i) {
    double t = 1.0 + i / 50.0;
    Mat d = Mat::Zero(3, 3);
    d.diagonal() << 1 + t, 1 + t, (1 + t) * (1 + t);
    phis.emplace_back(h3, d);
    ys.push_back(y);
  }
  CurveInvertResult r = curve_invert(h3, phis, ys);
  for (const auto& e : r.errors) EXPECT_TRUE(e.empty());
  // Jumps stay commensurate with the input steps along the sampled curve.
  EXPECT_LT(r.max_jump_ratio, 10.0);
  EXPECT_LT(r.max_jump, 0.1);
}

TEST(CurveInvert, PerPointFailuresCollected) {
  LieAlgebra h3 = heisenberg3();
  std::vector<GroupAutomorphism> phis;
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 2, 2, 4;
  phis.emplace_back(h3, d);
  phis.emplace_back(h3, Mat::Identity(3, 3));  // det gap fails here
  std::vector<GroupPoint> ys(2, unit(3, 0));
  CurveInvertResult r = curve_invert(h3, phis, ys);
  EXPECT_TRUE(r.errors[0].empty());
  EXPECT_FALSE(r.errors[1].empty());
}
