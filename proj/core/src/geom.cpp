#include "vtol/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace vtol {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Rotation Rotation::from_matrix(const Mat3& m) {
  Rotation r(m, Unchecked{});
  if (!m.allFinite() || r.orthonormality_error() > kTolerance) {
    throw std::invalid_argument("matrix is not a proper rotation");
  }
  return r;
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    throw std::invalid_argument("rotation axis has zero length");
  }
  return exp(axis / n * angle);
}

Rotation Rotation::exp(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  const Mat3 k = skew(rotvec);
  double a = 0.0;
  double b = 0.0;
  if (angle < 1e-4) {
    // Taylor series of sin(x)/x and (1-cos(x))/x^2
    const double a2 = angle * angle;
    a = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    b = 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Rotation(Mat3::Identity() + a * k + b * k * k, Unchecked{});
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) {
  return Rotation(q.normalized().toRotationMatrix(), Unchecked{});
}

Vec3 Rotation::log() const {
  const Eigen::AngleAxisd aa(m_);
  return aa.axis() * aa.angle();
}

Eigen::Quaterniond Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

double Rotation::orthonormality_error() const {
  const double ortho = (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(m_.determinant() - 1.0));
}

ErrorQuat attitude_error(const Rotation& desired, const Rotation& actual) {
  const Eigen::Quaterniond q(desired.matrix().transpose() * actual.matrix());
  double q0 = q.w();
  Vec3 qv = q.vec();
  const double norm = std::sqrt(q0 * q0 + qv.squaredNorm());
  q0 /= norm;
  qv /= norm;
  if (std::abs(q0) < 1e-12) {
    Eigen::Index axis = 0;
    qv.cwiseAbs().maxCoeff(&axis);
    if (qv[axis] < 0.0) {
      qv = -qv;
    }
    q0 = 1e-9;
    const double n = std::sqrt(q0 * q0 + qv.squaredNorm());
    return {q0 / n, qv / n};
  }
  if (q0 < 0.0) {
    q0 = -q0;
    qv = -qv;
  }
  return {q0, qv};
}

Rotation integrate_rotation(const Rotation& r, const Vec3& omega, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate_rotation: dt must be positive");
  }
  return r * Rotation::exp(omega * dt);
}

Vec3 dexp_inv(const Vec3& phi, const Vec3& omega) {
  const Vec3 c1 = phi.cross(omega);
  return omega + 0.5 * c1 + phi.cross(c1) / 12.0;
}

}  // namespace vtol
