#include "vtol/forcemodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vtol {

Vec3 incident_velocity(const Vec3& v, const Vec3& v_wind, const Rotation& r) {
  return r.matrix().transpose() * (v - v_wind);
}

AirflowState airflow_angles(const Vec3& v_incident, const ForceModelConfig& cfg) {
  AirflowState s;
  s.incident = v_incident;
  s.airspeed = v_incident.norm();
  if (s.airspeed <= cfg.min_airspeed) {
    return s;
  }
  s.alpha = std::atan2(v_incident.z(), v_incident.x());
  s.beta = std::asin(std::clamp(v_incident.y() / s.airspeed, -1.0, 1.0));
  switch (cfg.side_angle) {
    case SideForceAngle::kYOverZ:
      s.beta_bar = std::atan2(v_incident.y(), v_incident.z());
      break;
    case SideForceAngle::kYOverX:
      s.beta_bar = std::atan2(v_incident.y(), v_incident.x());
      break;
  }
  return s;
}

double sideforce_basis(double alpha, double airspeed, double u_z, const SideForceShape& shape) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  const double u = std::clamp(u_z, 0.0, 1.0);
  if (u == 0.0 || airspeed <= 0.0) {
    return 0.0;
  }
  return std::pow(u, shape.k1) * std::pow(airspeed, 2.0 - shape.k1) *
         std::pow(shape.diameter, 2.0 + shape.k1) * (kHalfPi * kHalfPi - alpha * alpha) *
         (alpha + shape.k2);
}

AeroCoefficients aero_coefficients(double alpha, const ForceParams& p) {
  return {
      p[Param::kLift0] + p[Param::kLift1] * alpha,
      p[Param::kDrag0] + p[Param::kDrag1] * alpha + p[Param::kDrag2] * alpha * alpha,
  };
}

Regressor regressor(const AirflowState& flow, double u_x, double u_z, const ForceModelConfig& cfg) {
  const double ux = std::clamp(u_x, 0.0, 1.0);
  const double uz = std::clamp(u_z, 0.0, 1.0);
  const double a = flow.alpha;
  const double g = sideforce_basis(a, flow.airspeed, uz, cfg.shape);
  const double q = cfg.aero.specific_pressure_area() * flow.airspeed * flow.airspeed;
  const Vec3 drag_dir(-std::cos(a), 0.0, -std::sin(a));
  const Vec3 lift_dir(std::sin(a), 0.0, -std::cos(a));

  Regressor phi = Regressor::Zero();
  phi.col(0) = Vec3(ux * ux, 0.0, 0.0);
  phi.col(1) = Vec3(0.0, 0.0, -uz * uz);
  phi.col(2) = Vec3(-g * std::cos(flow.beta_bar), -g * std::sin(flow.beta_bar), 0.0);
  phi.col(3) = q * drag_dir;
  phi.col(4) = q * a * drag_dir;
  phi.col(5) = q * a * a * drag_dir;
  phi.col(6) = q * lift_dir;
  phi.col(7) = q * a * lift_dir;
  return phi;
}

ForcePrediction predict_forces(const Regressor& phi, const ForceParams& p) {
  ForcePrediction f;
  f.thrust = phi.leftCols<3>() * p.theta.head<3>();
  f.aero = phi.rightCols<5>() * p.theta.tail<5>();
  f.total = f.thrust + f.aero;
  return f;
}

Regressor thrust_columns(const Regressor& phi) {
  Regressor out = Regressor::Zero();
  out.leftCols<3>() = phi.leftCols<3>();
  return out;
}

Regressor aero_columns(const Regressor& phi) {
  Regressor out = Regressor::Zero();
  out.rightCols<5>() = phi.rightCols<5>();
  return out;
}

}  // namespace vtol
