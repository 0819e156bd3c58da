#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vtol {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric map: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

/// Inverse of skew() for the antisymmetric part of m.
Vec3 vee(const Mat3& m);

/// Element of SO(3). Construction from an arbitrary matrix is checked;
/// products of valid rotations are not re-checked.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}

  /// Throws std::invalid_argument if m is not orthonormal with det +1.
  static Rotation from_matrix(const Mat3& m);
  static Rotation about_axis(const Vec3& axis, double angle);
  /// Exponential map of a rotation vector (axis * angle).
  static Rotation exp(const Vec3& rotvec);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
  Vec3 log() const;
  Eigen::Quaterniond quaternion() const;

  /// Largest deviation of R^T R from I, and |det R - 1|.
  double orthonormality_error() const;

  Rotation operator*(const Rotation& rhs) const {
    return Rotation(m_ * rhs.m_, Unchecked{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  Vec3 x_axis() const { return m_.col(0); }
  Vec3 y_axis() const { return m_.col(1); }
  Vec3 z_axis() const { return m_.col(2); }

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

/// Constrained error quaternion: q0 > 0, q0^2 + |qv|^2 = 1.
struct ErrorQuat {
  double q0 = 1.0;
  Vec3 qv = Vec3::Zero();
};

/// Error quaternion of R_tilde = desired^T * actual, sign chosen so q0 > 0.
/// A half-turn error (q0 == 0) is nudged toward the largest qv axis.
ErrorQuat attitude_error(const Rotation& desired, const Rotation& actual);

/// R * exp(skew(omega) * dt).
Rotation integrate_rotation(const Rotation& r, const Vec3& omega, double dt);

/// Inverse of the right-trivialised differential of exp, truncated after the
/// second commutator. Enough for a fourth order Munthe-Kaas step.
Vec3 dexp_inv(const Vec3& phi, const Vec3& omega);

}  // namespace vtol
