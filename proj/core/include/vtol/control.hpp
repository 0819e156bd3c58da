#pragma once

#include <functional>

#include "vtol/geom.hpp"
#include "vtol/sensors.hpp"

namespace vtol {

struct TrackingGains {
  Mat3 lambda_p = 0.7 * Mat3::Identity();
  Mat3 lambda_q = 3.0 * Mat3::Identity();
  Mat3 k_v = 3.0 * Mat3::Identity();
  Mat3 k_omega = 0.6 * Mat3::Identity();
};

struct PidGains {
  Mat3 k_p = 3.0 * Mat3::Identity();
  Mat3 k_i = 0.6 * Mat3::Identity();
  Mat3 k_d = 0.1 * Mat3::Identity();
  double integral_limit = 5.0;  // per-axis bound on the integrated velocity error
};

struct ReferenceSample {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

using ReferenceTrajectory = std::function<ReferenceSample(double)>;

ReferenceTrajectory hold_position(const Vec3& p);

struct ReferenceVelocity {
  Vec3 v_r = Vec3::Zero();
  Vec3 v_r_dot = Vec3::Zero();
};

/// v_r = pd_dot - Lp (p - pd), and its derivative using the measured v.
ReferenceVelocity reference_velocity(const Vec3& p, const Vec3& v, const ReferenceSample& ref,
                                     const Mat3& lambda_p);

/// omega_r = R_tilde^T omega_d - Lq q_v.
Vec3 reference_omega(const Rotation& r, const Rotation& r_d, const Vec3& omega_d,
                     const Mat3& lambda_q);

/// Inertial specific-force command -g + v_r_dot - Kv (v - v_r).
Vec3 force_command(const Vec3& v, const Vec3& v_r, const Vec3& v_r_dot, const Mat3& k_v);

Vec3 moment_command(const Mat3& inertia, const Vec3& omega, const Vec3& omega_r,
                    const Vec3& omega_r_dot, const Mat3& k_omega);

/// -g - Kp e - Kd e_dot - Ki integral(e).
Vec3 pid_force_command(const Vec3& v_err, const Vec3& v_err_dot, const Vec3& v_err_integral,
                       const PidGains& gains);

/// PID / PD baseline with a clamped integrator and a filtered derivative.
class PidForceController {
 public:
  PidForceController(PidGains gains, bool integral_enabled, double derivative_cutoff_hz = 20.0);

  Vec3 update(const Vec3& v_err, double dt);
  const Vec3& integral() const { return integral_; }

 private:
  PidGains gains_;
  bool integral_enabled_;
  Vec3 integral_ = Vec3::Zero();
  Vec3 previous_ = Vec3::Zero();
  bool primed_ = false;
  LowPass<Vec3> derivative_;
};

/// Backward difference followed by a first-order low-pass.
class FilteredDerivative {
 public:
  explicit FilteredDerivative(double cutoff_hz) : filter_(cutoff_hz) {}

  Vec3 update(const Vec3& x, double dt);

 private:
  LowPass<Vec3> filter_;
  Vec3 previous_ = Vec3::Zero();
  bool primed_ = false;
};

/// Body angular velocity of a rotation signal by log(R_prev^T R)/dt, low-pass
/// filtered and limited in magnitude.
class AttitudeRateEstimator {
 public:
  AttitudeRateEstimator(double cutoff_hz, double max_rate)
      : filter_(cutoff_hz), max_rate_(max_rate) {}

  Vec3 update(const Rotation& r, double dt);

 private:
  LowPass<Vec3> filter_;
  double max_rate_;
  Rotation previous_;
  bool primed_ = false;
};

}  // namespace vtol
