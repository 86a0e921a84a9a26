#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "solvctrl/tolerances.hpp"

namespace solvctrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

namespace linalg {

/// Scale-invariant numerical rank: singular values above
/// rank_rel * sigma_max count.
inline int rank(const Mat& a, double rel = tol::rank_rel) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (smax == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel * smax) ++r;
  return r;
}

inline int rank(const CMat& a, double rel = tol::rank_rel) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(a);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (smax == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel * smax) ++r;
  return r;
}

/// Orthonormal basis of the kernel of `a` (columns). An all-zero or empty
/// matrix has full kernel.
inline Mat kernel(const Mat& a, double rel = tol::rank_rel) {
  if (a.rows() == 0 || a.size() == 0 || a.norm() == 0.0)
    return Mat::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  double smax = svd.singularValues()(0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel * smax) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

/// Orthonormal basis of the column span of `a`.
inline Mat column_space(const Mat& a, double rel = tol::rank_rel) {
  if (a.cols() == 0 || a.size() == 0 || a.norm() == 0.0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  double smax = svd.singularValues()(0);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rel * smax) ++r;
  return svd.matrixU().leftCols(r);
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// bases of equal dimension; 0 means equal subspaces. Uses the sine of the
/// angle (projection residual), which stays accurate for tiny angles.
inline double max_principal_angle(const Mat& q1, const Mat& q2) {
  if (q1.cols() != q2.cols()) return 1.5707963267948966;
  if (q1.cols() == 0) return 0.0;
  Mat resid = q2 - q1 * (q1.transpose() * q2);
  Eigen::JacobiSVD<Mat> svd(resid);
  double s = std::min(1.0, svd.singularValues()(0));
  return std::asin(s);
}

/// Distance from `v` to the span of orthonormal columns `q`.
inline double distance_to_span(const Mat& q, const Vec& v) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.transpose() * v)).norm();
}

/// True when every column of `b` lies in the span of orthonormal `q`
/// within `tol_abs` (scaled by the column norm).
inline bool contained_in(const Mat& b, const Mat& q, double tol_abs) {
  for (int j = 0; j < b.cols(); ++j) {
    double scale = std::max(1.0, b.col(j).norm());
    if (distance_to_span(q, b.col(j)) > tol_abs * scale) return false;
  }
  return true;
}

}  // namespace linalg
}  // namespace solvctrl
