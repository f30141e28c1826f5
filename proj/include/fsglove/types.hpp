#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace fsglove {

template <class S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <class S> using Vec3T = Eigen::Matrix<S, 3, 1>;

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Nanoseconds since an arbitrary session epoch.
using Timestamp = std::uint64_t;

inline constexpr int kNumLinks = 16;   // palm + 5 fingers x 3 phalanxes
inline constexpr int kNumJoints = 15;  // links 1..15 each carry one joint
inline constexpr int kNumFingers = 5;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline constexpr Timestamp seconds_to_ns(double s) {
  return static_cast<Timestamp>(s * 1e9 + 0.5);
}

}  // namespace fsglove
