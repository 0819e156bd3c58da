#pragma once

#include <optional>

#include "vtol/forcemodel.hpp"
#include "vtol/geom.hpp"

namespace vtol {

struct AllocationConfig {
  double alpha_max = 0.21;           // rad
  Vec3 mask{1.0, 0.0, 1.0};          // body axes the thrusters can act on
  double min_airspeed = 1.5;         // below this the hover solution is used, m/s
  double cross_tolerance = 1e-6;     // relative, for |v_i x f_b|
};

struct ThrusterSolution {
  double u_x = 0.0;
  double u_z = 0.0;
  Vec3 residual = Vec3::Zero();  // body frame, R^T f_cmd - predicted force
  bool saturated = false;
};

struct AllocationResult {
  Rotation r_d;
  double alpha_d = 0.0;
  double u_x = 0.0;
  double u_z = 0.0;
  Vec3 residual = Vec3::Zero();
  bool hover_branch = false;
  bool saturated = false;
};

/// Incident-wind frame [x_i, y_i, z_i] in body coordinates. nullopt when the
/// airspeed is below the threshold or v_i and f_b are (nearly) parallel.
std::optional<Rotation> incident_frame(const Vec3& v_incident, const Vec3& f_body,
                                       const AllocationConfig& cfg);

/// Angle of attack making the lift model supply the normal-force demand
/// -f_b . z_i, limited to alpha_max.
double desired_alpha(const Vec3& f_body, const Vec3& z_i, double airspeed, const ForceParams& theta,
                     const AeroConstants& aero, const AllocationConfig& cfg);

/// R * R_i * R_y(alpha_d).
Rotation desired_attitude(const Rotation& r, const Rotation& r_i, double alpha_d);

/// Multicopter tilt solution: body -z along the required force with any
/// forward component left to the pusher, current heading kept.
Rotation hover_attitude(const Vec3& f_cmd, const Rotation& r, const Vec3& f_aero_inertial);

/// Throttles meeting the masked force demand at the current attitude. The
/// lift rotors are solved first, then the pusher including rotor side force.
ThrusterSolution solve_thrusters(const Vec3& f_cmd, const Rotation& r, const AirflowState& flow,
                                 const ForceParams& theta, const ForceModelConfig& model,
                                 const AllocationConfig& cfg);

/// Full allocation: desired attitude plus thruster commands.
AllocationResult allocate(const Vec3& f_cmd, const Rotation& r, const AirflowState& flow,
                          const ForceParams& theta, const ForceModelConfig& model,
                          const AllocationConfig& cfg);

}  // namespace vtol
