#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fsglove/errors.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

/// Unit quaternion in (w, x, y, z) order with a canonical sign so that
/// equality and round-trip tests are well defined: w >= 0, ties broken
/// lexicographically on (x, y, z).
template <class S>
struct QuatT {
  S w{1}, x{0}, y{0}, z{0};

  QuatT() = default;

  /// Normalizes and canonicalizes the given components.
  QuatT(S w_, S x_, S y_, S z_) : w(w_), x(x_), y(y_), z(z_) {
    const S n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n;
    x /= n;
    y /= n;
    z /= n;
    canonicalize();
  }

  /// Adopts the components verbatim (no normalization). Used when exact
  /// bit patterns must survive, e.g. widening f32 wire values.
  static QuatT from_raw(S w_, S x_, S y_, S z_) {
    QuatT q;
    q.w = w_;
    q.x = x_;
    q.y = y_;
    q.z = z_;
    return q;
  }

  void canonicalize() {
    const bool flip =
        w < S(0) ||
        (w == S(0) &&
         (x < S(0) || (x == S(0) && (y < S(0) || (y == S(0) && z < S(0))))));
    if (flip) {
      w = -w;
      x = -x;
      y = -y;
      z = -z;
    }
  }

  S norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  friend bool operator==(const QuatT& a, const QuatT& b) {
    return a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z;
  }
};

using UnitQuaternion = QuatT<double>;

template <class S>
Mat3T<S> quat_to_matrix(const QuatT<S>& q) {
  const S w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3T<S> m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

/// Shepperd's method: picks the numerically largest component first.
template <class S>
QuatT<S> matrix_to_quat(const Mat3T<S>& m) {
  const S t = m.trace();
  S w, x, y, z;
  if (t > m(0, 0) && t > m(1, 1) && t > m(2, 2)) {
    const S r = std::sqrt(S(1) + t);
    const S s = S(0.5) / r;
    w = S(0.5) * r;
    x = (m(2, 1) - m(1, 2)) * s;
    y = (m(0, 2) - m(2, 0)) * s;
    z = (m(1, 0) - m(0, 1)) * s;
  } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const S r = std::sqrt(S(1) + m(0, 0) - m(1, 1) - m(2, 2));
    const S s = S(0.5) / r;
    x = S(0.5) * r;
    w = (m(2, 1) - m(1, 2)) * s;
    y = (m(0, 1) + m(1, 0)) * s;
    z = (m(0, 2) + m(2, 0)) * s;
  } else if (m(1, 1) >= m(2, 2)) {
    const S r = std::sqrt(S(1) - m(0, 0) + m(1, 1) - m(2, 2));
    const S s = S(0.5) / r;
    y = S(0.5) * r;
    w = (m(0, 2) - m(2, 0)) * s;
    x = (m(0, 1) + m(1, 0)) * s;
    z = (m(1, 2) + m(2, 1)) * s;
  } else {
    const S r = std::sqrt(S(1) - m(0, 0) - m(1, 1) + m(2, 2));
    const S s = S(0.5) / r;
    z = S(0.5) * r;
    w = (m(1, 0) - m(0, 1)) * s;
    x = (m(0, 2) + m(2, 0)) * s;
    y = (m(1, 2) + m(2, 1)) * s;
  }
  return QuatT<S>(w, x, y, z);
}

/// Geodesic distance on SO(3): arccos((trace(a^T b) - 1) / 2), in [0, pi].
template <class S>
S geodesic_angle(const Mat3T<S>& a, const Mat3T<S>& b) {
  const S c = ((a.transpose() * b).trace() - S(1)) / S(2);
  return std::acos(std::clamp(c, S(-1), S(1)));
}

/// Frobenius-nearest rotation via SVD with determinant correction.
/// Throws DegenerateMatrix when the smallest singular value is <= 1e-12.
template <class S>
Mat3T<S> project_to_so3(const Mat3T<S>& m) {
  Eigen::JacobiSVD<Mat3T<S>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= S(1e-12))
    throw DegenerateMatrix("project_to_so3: rank-deficient matrix");
  const Mat3T<S> u = svd.matrixU();
  const Mat3T<S> v = svd.matrixV();
  Vec3T<S> d(S(1), S(1), (u * v.transpose()).determinant() > S(0) ? S(1) : S(-1));
  return u * d.asDiagonal() * v.transpose();
}

/// Chordal (Frobenius) mean: project_to_so3 of the weighted matrix sum.
template <class S>
Mat3T<S> average_rotation(const std::vector<Mat3T<S>>& estimates,
                          const std::vector<S>& weights) {
  if (estimates.empty()) throw DegenerateMatrix("average_rotation: no estimates");
  if (weights.size() != estimates.size())
    throw DegenerateMatrix("average_rotation: weight count mismatch");
  Mat3T<S> sum = Mat3T<S>::Zero();
  for (std::size_t k = 0; k < estimates.size(); ++k)
    sum += weights[k] * estimates[k];
  return project_to_so3(sum);
}

template <class S>
Mat3T<S> average_rotation(const std::vector<Mat3T<S>>& estimates) {
  return average_rotation(estimates, std::vector<S>(estimates.size(), S(1)));
}

template <class S>
Mat3T<S> rot_x(S angle) {
  const S c = std::cos(angle), s = std::sin(angle);
  Mat3T<S> m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

template <class S>
Mat3T<S> rot_y(S angle) {
  const S c = std::cos(angle), s = std::sin(angle);
  Mat3T<S> m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

template <class S>
Mat3T<S> rot_z(S angle) {
  const S c = std::cos(angle), s = std::sin(angle);
  Mat3T<S> m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

/// Rodrigues formula for a rotation vector (axis * angle).
template <class S>
Mat3T<S> exp_so3(const Vec3T<S>& w) {
  const S angle = w.norm();
  if (angle < S(1e-12)) return Mat3T<S>::Identity();
  const Vec3T<S> axis = w / angle;
  Mat3T<S> k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3T<S>::Identity() + std::sin(angle) * k +
         (S(1) - std::cos(angle)) * k * k;
}

/// Rotation vector of R (inverse of exp_so3), magnitude in [0, pi].
template <class S>
Vec3T<S> log_so3(const Mat3T<S>& r) {
  const S angle = geodesic_angle(Mat3T<S>(Mat3T<S>::Identity()), r);
  if (angle < S(1e-12)) return Vec3T<S>::Zero();
  Vec3T<S> axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const S n = axis.norm();
  if (n < S(1e-9)) {
    // angle ~ pi: use the dominant diagonal entry of (R + I) / 2
    Mat3T<S> a = (r + Mat3T<S>::Identity()) * S(0.5);
    int i = 0;
    if (a(1, 1) > a(i, i)) i = 1;
    if (a(2, 2) > a(i, i)) i = 2;
    Vec3T<S> ax = a.col(i) / std::sqrt(a(i, i));
    return ax.normalized() * angle;
  }
  return axis * (angle / n);
}

/// Signed rotation of R about a fixed unit axis, ignoring off-axis components.
/// Used to read hinge-joint angles out of a full relative rotation.
template <class S>
S twist_about_axis(const Mat3T<S>& r, const Vec3T<S>& axis) {
  const QuatT<S> q = matrix_to_quat(r);
  const S proj = q.x * axis.x() + q.y * axis.y() + q.z * axis.z();
  return S(2) * std::atan2(proj, q.w);
}

}  // namespace fsglove
