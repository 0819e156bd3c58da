#include "vtol/plant.hpp"

#include <algorithm>
#include <cmath>

namespace vtol {

ActuatorCommand saturate(const ActuatorCommand& cmd, double torque_limit) {
  ActuatorCommand out;
  out.u_x = std::clamp(cmd.u_x, 0.0, 1.0);
  out.u_z = std::clamp(cmd.u_z, 0.0, 1.0);
  out.torque = cmd.torque.cwiseMax(-torque_limit).cwiseMin(torque_limit);
  return out;
}

ActuatorCommand ThrottleLag::apply(const ActuatorCommand& cmd, double dt) {
  if (tau_ <= 0.0) {
    return cmd;
  }
  if (!primed_) {
    reset(cmd);
    return cmd;
  }
  const double a = 1.0 - std::exp(-dt / tau_);
  state_.u_x += a * (cmd.u_x - state_.u_x);
  state_.u_z += a * (cmd.u_z - state_.u_z);
  state_.torque = cmd.torque;
  return state_;
}

void WindSchedule::validate() const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].throttle < 0.0 || steps[i].throttle > 1.0) {
      throw std::invalid_argument("wind throttle outside [0,1]");
    }
    if (i > 0 && !(steps[i].start > steps[i - 1].start)) {
      throw std::invalid_argument("wind step times must be strictly increasing");
    }
  }
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("wind direction must be a unit vector");
  }
  if (max_speed < 0.0 || lag_time_constant < 0.0) {
    throw std::invalid_argument("wind speed and lag must be non-negative");
  }
}

double WindSchedule::throttle_at(double t) const {
  double u = 0.0;
  for (const auto& s : steps) {
    if (t >= s.start) {
      u = s.throttle;
    } else {
      break;
    }
  }
  return u;
}

Vec3 wind_at(double t, const WindSchedule& sched) {
  if (sched.lag_time_constant <= 0.0) {
    return sched.direction * sched.max_speed * sched.throttle_at(t);
  }
  // Closed-form lag response: propagate the filter state across each step.
  double level = 0.0;
  double target = 0.0;
  double since = 0.0;
  for (const auto& s : sched.steps) {
    if (s.start > t) {
      break;
    }
    level = target + (level - target) * std::exp(-(s.start - since) / sched.lag_time_constant);
    target = s.throttle;
    since = s.start;
  }
  level = target + (level - target) * std::exp(-(t - since) / sched.lag_time_constant);
  return sched.direction * sched.max_speed * level;
}

Vec3 Disturbance::operator()(const RigidBodyState& s) const {
  if (amplitude == 0.0) {
    return Vec3::Zero();
  }
  const Vec3 scaled = s.v / velocity_scale;
  return amplitude * scaled.array().tanh().matrix();
}

Vec3 true_body_force(const RigidBodyState& s, const ActuatorCommand& cmd, const Vec3& v_wind,
                     const PlantTruth& truth) {
  const Vec3 vi = incident_velocity(s.v, v_wind, s.R);
  const AirflowState flow = airflow_angles(vi, truth.model);
  const Regressor phi = regressor(flow, cmd.u_x, cmd.u_z, truth.model);
  return phi * truth.theta.theta + truth.disturbance(s);
}

namespace {

struct Derivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Vec3 omega;      // body rate, drives the rotation increment
  Vec3 omega_dot;
};

Derivative evaluate(const RigidBodyState& s, const ActuatorCommand& cmd, const Vec3& v_wind,
                    const PlantTruth& truth, const Mat3& inertia_inv) {
  Derivative d;
  d.p_dot = s.v;
  d.v_dot = kGravity + s.R * true_body_force(s, cmd, v_wind, truth);
  d.omega = s.omega;
  const Vec3 h = truth.inertia * s.omega;
  d.omega_dot = inertia_inv * (skew(h) * s.omega + cmd.torque);
  return d;
}

}  // namespace

RigidBodyState step(const RigidBodyState& s, const ActuatorCommand& cmd_in, const WindSchedule& sched,
                    double t, double dt, const PlantTruth& truth) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw std::invalid_argument("plant step: dt must be in (0, 0.01]");
  }
  const ActuatorCommand cmd = saturate(cmd_in, truth.torque_limit);
  const Mat3 inertia_inv = truth.inertia.inverse();

  const auto stage = [&](const Vec3& dp, const Vec3& dv, const Vec3& phi, const Vec3& dw) {
    RigidBodyState x;
    x.p = s.p + dp;
    x.v = s.v + dv;
    x.R = s.R * Rotation::exp(phi);
    x.omega = s.omega + dw;
    return x;
  };

  const Vec3 w0 = wind_at(t, sched);
  const Vec3 wh = wind_at(t + 0.5 * dt, sched);
  const Vec3 w1 = wind_at(t + dt, sched);

  const Derivative k1 = evaluate(s, cmd, w0, truth, inertia_inv);
  const Vec3 f1 = k1.omega;

  const Vec3 phi2 = 0.5 * dt * f1;
  const Derivative k2 = evaluate(
      stage(0.5 * dt * k1.p_dot, 0.5 * dt * k1.v_dot, phi2, 0.5 * dt * k1.omega_dot), cmd, wh,
      truth, inertia_inv);
  const Vec3 f2 = dexp_inv(phi2, k2.omega);

  const Vec3 phi3 = 0.5 * dt * f2;
  const Derivative k3 = evaluate(
      stage(0.5 * dt * k2.p_dot, 0.5 * dt * k2.v_dot, phi3, 0.5 * dt * k2.omega_dot), cmd, wh,
      truth, inertia_inv);
  const Vec3 f3 = dexp_inv(phi3, k3.omega);

  const Vec3 phi4 = dt * f3;
  const Derivative k4 = evaluate(stage(dt * k3.p_dot, dt * k3.v_dot, phi4, dt * k3.omega_dot), cmd,
                                 w1, truth, inertia_inv);
  const Vec3 f4 = dexp_inv(phi4, k4.omega);

  const double c = dt / 6.0;
  RigidBodyState out;
  out.p = s.p + c * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  out.v = s.v + c * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  out.omega = s.omega + c * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);
  out.R = s.R * Rotation::exp(c * (f1 + 2.0 * f2 + 2.0 * f3 + f4));

  if (!out.p.allFinite() || !out.v.allFinite() || !out.omega.allFinite() ||
      !out.R.matrix().allFinite()) {
    throw DivergedError("non-finite state");
  }
  if (out.v.norm() > 100.0) {
    throw DivergedError("speed exceeded 100 m/s");
  }
  return out;
}

}  // namespace vtol
