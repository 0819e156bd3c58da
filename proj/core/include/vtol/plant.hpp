#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vtol/forcemodel.hpp"
#include "vtol/geom.hpp"

namespace vtol {

/// NED gravity, m/s^2.
inline const Vec3 kGravity{0.0, 0.0, 9.81};

struct RigidBodyState {
  Vec3 p = Vec3::Zero();      // m, inertial NED
  Vec3 v = Vec3::Zero();      // m/s, inertial
  Rotation R;                 // body to inertial
  Vec3 omega = Vec3::Zero();  // rad/s, body
};

struct ActuatorCommand {
  double u_x = 0.0;
  double u_z = 0.0;
  Vec3 torque = Vec3::Zero();  // N m, body
};

/// Clamp throttles to [0,1] and each torque component to +-torque_limit.
ActuatorCommand saturate(const ActuatorCommand& cmd, double torque_limit);

/// Optional first-order lag on the throttles. A time constant of zero
/// passes commands straight through.
class ThrottleLag {
 public:
  explicit ThrottleLag(double time_constant = 0.0) : tau_(time_constant) {}
  ActuatorCommand apply(const ActuatorCommand& cmd, double dt);
  void reset(const ActuatorCommand& cmd) { state_ = cmd; primed_ = true; }

 private:
  double tau_;
  ActuatorCommand state_;
  bool primed_ = false;
};

struct WindStep {
  double start = 0.0;     // s
  double throttle = 0.0;  // fan throttle fraction [0,1]
};

/// Fan-array wind: speed proportional to fan throttle, piecewise constant
/// in throttle, optionally smoothed by a first-order lag.
struct WindSchedule {
  std::vector<WindStep> steps;
  double max_speed = 12.9;                // m/s at full throttle
  Vec3 direction{-1.0, 0.0, 0.0};         // unit, inertial; blows toward -x
  double lag_time_constant = 0.5;         // s, 0 for pure steps

  /// Throws std::invalid_argument on non-increasing times, throttle outside
  /// [0,1], or a non-unit direction.
  void validate() const;
  double throttle_at(double t) const;
};

/// Wind velocity in the inertial frame at time t.
Vec3 wind_at(double t, const WindSchedule& sched);

/// Bounded, state dependent specific force not captured by the model.
struct Disturbance {
  double amplitude = 0.0;  // m/s^2 per axis
  double velocity_scale = 2.0;  // m/s

  Vec3 operator()(const RigidBodyState& s) const;
};

struct PlantTruth {
  ForceParams theta;
  ForceModelConfig model;
  Mat3 inertia = Eigen::Vector3d(0.045, 0.025, 0.065).asDiagonal();
  Disturbance disturbance;
  double torque_limit = 2.0;  // N m
};

class DivergedError : public std::runtime_error {
 public:
  explicit DivergedError(const std::string& what) : std::runtime_error(what) {}
};

/// Specific body force f_b from the true model at state s.
Vec3 true_body_force(const RigidBodyState& s, const ActuatorCommand& cmd, const Vec3& v_wind,
                     const PlantTruth& truth);

/// One fixed step of the rigid-body equations with a fourth order
/// Runge-Kutta-Munthe-Kaas scheme: RK4 on (p, v, omega) and on the rotation
/// increment in the Lie algebra, mapped back through exp.
/// Throws DivergedError on non-finite state or |v| > 100 m/s.
RigidBodyState step(const RigidBodyState& s, const ActuatorCommand& cmd, const WindSchedule& sched,
                    double t, double dt, const PlantTruth& truth);

}  // namespace vtol
