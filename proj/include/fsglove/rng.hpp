#pragma once

#include <cstdint>
#include <random>

#include "fsglove/so3.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

/// Deterministic random source. All derived quantities are computed with
/// explicit formulas on top of the (standard-specified) mt19937_64 stream,
/// so identical seeds give identical sequences on every platform; none of
/// the implementation-defined <random> distributions are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Vec3 unit_vector() {
    Vec3 v;
    do {
      v = Vec3(normal(), normal(), normal());
    } while (v.norm() < 1e-6);
    return v.normalized();
  }

  /// Uniform over SO(3) (normalized 4D Gaussian quaternion).
  Mat3 rotation() {
    UnitQuaternion q(normal(), normal(), normal(), normal());
    return quat_to_matrix(q);
  }

  /// Axis uniform on the sphere, angle uniform in [0, max_angle].
  Mat3 rotation_within(double max_angle) {
    const Vec3 axis = unit_vector();
    return exp_so3<double>(axis * uniform(0.0, max_angle));
  }

 private:
  std::mt19937_64 gen_;
};

/// splitmix64: used to derive independent sub-seeds from one session seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fsglove
