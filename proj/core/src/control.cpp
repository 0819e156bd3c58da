#include "vtol/control.hpp"

#include "vtol/plant.hpp"

namespace vtol {

ReferenceTrajectory hold_position(const Vec3& p) {
  return [p](double) { return ReferenceSample{p, Vec3::Zero(), Vec3::Zero()}; };
}

ReferenceVelocity reference_velocity(const Vec3& p, const Vec3& v, const ReferenceSample& ref,
                                     const Mat3& lambda_p) {
  return {ref.v - lambda_p * (p - ref.p), ref.a - lambda_p * (v - ref.v)};
}

Vec3 reference_omega(const Rotation& r, const Rotation& r_d, const Vec3& omega_d,
                     const Mat3& lambda_q) {
  const Mat3 r_tilde = r_d.matrix().transpose() * r.matrix();
  const ErrorQuat q = attitude_error(r_d, r);
  return r_tilde.transpose() * omega_d - lambda_q * q.qv;
}

Vec3 force_command(const Vec3& v, const Vec3& v_r, const Vec3& v_r_dot, const Mat3& k_v) {
  return -kGravity + v_r_dot - k_v * (v - v_r);
}

Vec3 moment_command(const Mat3& inertia, const Vec3& omega, const Vec3& omega_r,
                    const Vec3& omega_r_dot, const Mat3& k_omega) {
  return inertia * omega_r_dot - skew(inertia * omega) * omega_r - k_omega * (omega - omega_r);
}

Vec3 pid_force_command(const Vec3& v_err, const Vec3& v_err_dot, const Vec3& v_err_integral,
                       const PidGains& gains) {
  return -kGravity - gains.k_p * v_err - gains.k_d * v_err_dot - gains.k_i * v_err_integral;
}

PidForceController::PidForceController(PidGains gains, bool integral_enabled,
                                       double derivative_cutoff_hz)
    : gains_(std::move(gains)),
      integral_enabled_(integral_enabled),
      derivative_(derivative_cutoff_hz) {}

Vec3 PidForceController::update(const Vec3& v_err, double dt) {
  Vec3 rate = Vec3::Zero();
  if (primed_) {
    rate = (v_err - previous_) / dt;
  }
  previous_ = v_err;
  primed_ = true;
  const Vec3 rate_f = derivative_.update(rate, dt);

  if (integral_enabled_) {
    const double lim = gains_.integral_limit;
    integral_ = (integral_ + v_err * dt).cwiseMax(-lim).cwiseMin(lim);
  }
  return pid_force_command(v_err, rate_f, integral_, gains_);
}

Vec3 FilteredDerivative::update(const Vec3& x, double dt) {
  Vec3 rate = Vec3::Zero();
  if (primed_) {
    rate = (x - previous_) / dt;
  }
  previous_ = x;
  primed_ = true;
  return filter_.update(rate, dt);
}

Vec3 AttitudeRateEstimator::update(const Rotation& r, double dt) {
  Vec3 rate = Vec3::Zero();
  if (primed_) {
    rate = (previous_.transpose() * r).log() / dt;
    const double n = rate.norm();
    if (n > max_rate_) {
      rate *= max_rate_ / n;
    }
  }
  previous_ = r;
  primed_ = true;
  return filter_.update(rate, dt);
}

}  // namespace vtol
