#include "vtol/allocation.hpp"

#include <algorithm>
#include <cmath>

namespace vtol {

std::optional<Rotation> incident_frame(const Vec3& v_incident, const Vec3& f_body,
                                       const AllocationConfig& cfg) {
  const double speed = v_incident.norm();
  if (!(speed > cfg.min_airspeed)) {
    return std::nullopt;
  }
  const Vec3 cross = v_incident.cross(f_body);
  const double cross_norm = cross.norm();
  if (!(cross_norm > cfg.cross_tolerance * speed * f_body.norm())) {
    return std::nullopt;
  }
  Mat3 m;
  m.col(0) = v_incident / speed;
  m.col(1) = cross / cross_norm;
  m.col(2) = m.col(0).cross(m.col(1));
  return Rotation::from_matrix(m);
}

double desired_alpha(const Vec3& f_body, const Vec3& z_i, double airspeed, const ForceParams& theta,
                     const AeroConstants& aero, const AllocationConfig& cfg) {
  const double q = aero.specific_pressure_area() * airspeed * airspeed;
  const double l0 = q * theta[Param::kLift0];
  const double l1 = q * theta[Param::kLift1];
  const double demand = -f_body.dot(z_i);
  const double l_max = l0 + l1 * cfg.alpha_max;
  if (demand > l_max || !(l1 > 0.0)) {
    return cfg.alpha_max;
  }
  // The lower bound keeps the wing out of negative stall for small demands.
  return std::max((demand - l0) / l1, -cfg.alpha_max);
}

Rotation desired_attitude(const Rotation& r, const Rotation& r_i, double alpha_d) {
  return r * r_i * Rotation::exp(Vec3(0.0, alpha_d, 0.0));
}

Rotation hover_attitude(const Vec3& f_cmd, const Rotation& r, const Vec3& f_aero_inertial) {
  const Vec3 body_x = r.x_axis();
  Vec3 heading(body_x.x(), body_x.y(), 0.0);
  if (heading.norm() < 1e-6) {
    // Pointing straight up or down; fall back to the body y axis for yaw.
    const Vec3 body_y = r.y_axis();
    heading = Vec3(-body_y.y(), body_y.x(), 0.0);
  }
  heading.normalize();

  const Vec3 required = f_cmd - f_aero_inertial;
  const double forward = std::max(0.0, required.dot(heading));
  const Vec3 tilt = required - forward * heading;

  Vec3 z_d = Vec3::UnitZ();
  if (tilt.norm() > 1e-6) {
    z_d = -tilt.normalized();
  }
  Vec3 y_d = z_d.cross(heading);
  if (y_d.norm() < 1e-6) {
    y_d = r.y_axis();
  }
  y_d.normalize();
  const Vec3 x_d = y_d.cross(z_d);

  Mat3 m;
  m.col(0) = x_d;
  m.col(1) = y_d;
  m.col(2) = z_d;
  return Rotation::from_matrix(m);
}

ThrusterSolution solve_thrusters(const Vec3& f_cmd, const Rotation& r, const AirflowState& flow,
                                 const ForceParams& theta, const ForceModelConfig& model,
                                 const AllocationConfig& cfg) {
  const Regressor phi_aero = aero_columns(regressor(flow, 0.0, 0.0, model));
  const Vec3 f_aero = phi_aero * theta.theta;
  const Vec3 f_body = r.matrix().transpose() * f_cmd;
  const Vec3 target = cfg.mask.cwiseProduct(f_body - f_aero);

  ThrusterSolution sol;
  const double ct_z = theta[Param::kThrustZ];
  const double ct_x = theta[Param::kThrustX];

  if (cfg.mask.z() != 0.0 && ct_z > 0.0) {
    const double u2 = -target.z() / ct_z;
    sol.saturated |= u2 < 0.0 || u2 > 1.0;
    sol.u_z = std::sqrt(std::clamp(u2, 0.0, 1.0));
  }
  if (cfg.mask.x() != 0.0 && ct_x > 0.0) {
    const double g = sideforce_basis(flow.alpha, flow.airspeed, sol.u_z, model.shape);
    const double u2 = (target.x() + theta[Param::kSideForce] * g * std::cos(flow.beta_bar)) / ct_x;
    sol.saturated |= u2 < 0.0 || u2 > 1.0;
    sol.u_x = std::sqrt(std::clamp(u2, 0.0, 1.0));
  }

  const Regressor phi = regressor(flow, sol.u_x, sol.u_z, model);
  sol.residual = f_body - phi * theta.theta;
  return sol;
}

AllocationResult allocate(const Vec3& f_cmd, const Rotation& r, const AirflowState& flow,
                          const ForceParams& theta, const ForceModelConfig& model,
                          const AllocationConfig& cfg) {
  AllocationResult out;
  const Vec3 f_body = r.matrix().transpose() * f_cmd;
  const auto r_i = incident_frame(flow.incident, f_body, cfg);
  if (r_i) {
    out.alpha_d = desired_alpha(f_body, r_i->z_axis(), flow.airspeed, theta, model.aero, cfg);
    out.r_d = desired_attitude(r, *r_i, out.alpha_d);
  } else {
    const Vec3 f_aero = aero_columns(regressor(flow, 0.0, 0.0, model)) * theta.theta;
    out.r_d = hover_attitude(f_cmd, r, r * f_aero);
    out.hover_branch = true;
  }
  const ThrusterSolution sol = solve_thrusters(f_cmd, r, flow, theta, model, cfg);
  out.u_x = sol.u_x;
  out.u_z = sol.u_z;
  out.residual = sol.residual;
  out.saturated = sol.saturated;
  return out;
}

}  // namespace vtol
