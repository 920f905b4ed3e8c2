#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace lobeforge {

// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
// needed so that outputs are reproducible from the run seed alone,
// independent of platform library versions and thread scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare, so the call sequence is
  // a pure function of the draw index).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  Eigen::Vector3d unit_vector() {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(normal(), normal(), normal());
    } while (v.norm() < 1e-12);
    return v.normalized();
  }

  // Uniformly distributed rotation from a normalized quaternion of four
  // normal deviates.
  Eigen::Matrix3d rotation() {
    Eigen::Vector4d q;
    do {
      q = Eigen::Vector4d(normal(), normal(), normal(), normal());
    } while (q.norm() < 1e-12);
    q.normalize();
    return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
  }

  // Derives an independent stream for a sub-task (e.g. repetition index k of
  // a batch run) without consuming draws from this stream.
  SplitMix64 fork(std::uint64_t salt) const {
    SplitMix64 child(state_ ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL));
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace lobeforge
