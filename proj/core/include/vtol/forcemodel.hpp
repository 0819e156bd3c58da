#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

#include "vtol/geom.hpp"

namespace vtol {

/// Column order of the regressor and of the parameter vector.
enum class Param : int {
  kThrustX = 0,
  kThrustZ,
  kSideForce,
  kDrag0,
  kDrag1,
  kDrag2,
  kLift0,
  kLift1,
};

inline constexpr int kNumParams = 8;
inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "CTx", "CTz", "CS", "CD0", "CD1", "CD2", "CL0", "CL1"};

using ParamVector = Eigen::Matrix<double, kNumParams, 1>;
using ParamMatrix = Eigen::Matrix<double, kNumParams, kNumParams>;
/// 3x8 basis: predicted specific body force = regressor * theta.
using Regressor = Eigen::Matrix<double, 3, kNumParams>;

/// Mass-normalised force-model coefficients. Thruster entries carry every
/// constant (density, prop diameter, throttle-to-speed gain, mass); the
/// aerodynamic entries are the usual dimensionless coefficients.
struct ForceParams {
  ParamVector theta = ParamVector::Zero();

  double operator[](Param p) const { return theta[static_cast<int>(p)]; }
  double& operator[](Param p) { return theta[static_cast<int>(p)]; }
};

struct SideForceShape {
  double k1 = 1.425;
  double k2 = 3.126;
  double diameter = 6.0 * 0.0254;  // m
};

struct AeroConstants {
  double rho = 1.225;   // kg/m^3
  double s_ref = 0.223; // m^2
  double mass = 1.70;   // kg

  /// 1/2 rho S / m, multiply by V^2 to get specific force per unit coefficient.
  double specific_pressure_area() const { return 0.5 * rho * s_ref / mass; }
};

/// How the side-force direction angle is formed from the incident velocity.
enum class SideForceAngle {
  kYOverZ,  // atan2(v_y, v_z), as printed
  kYOverX,  // atan2(v_y, v_x)
};

struct ForceModelConfig {
  AeroConstants aero;
  SideForceShape shape;
  SideForceAngle side_angle = SideForceAngle::kYOverZ;
  double min_airspeed = 0.5;  // below this alpha and beta are zeroed, m/s
};

struct AirflowState {
  Vec3 incident = Vec3::Zero();  // body frame, m/s
  double airspeed = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double beta_bar = 0.0;
};

struct AeroCoefficients {
  double lift = 0.0;
  double drag = 0.0;
};

struct ForcePrediction {
  Vec3 total = Vec3::Zero();
  Vec3 thrust = Vec3::Zero();
  Vec3 aero = Vec3::Zero();
};

/// Body-frame incident air velocity R^T (v - v_wind).
Vec3 incident_velocity(const Vec3& v, const Vec3& v_wind, const Rotation& r);

AirflowState airflow_angles(const Vec3& v_incident, const ForceModelConfig& cfg = {});

/// Rotor side-force basis G(alpha, V, u_z) with fixed shape exponents.
double sideforce_basis(double alpha, double airspeed, double u_z, const SideForceShape& shape);

AeroCoefficients aero_coefficients(double alpha, const ForceParams& p);

Regressor regressor(const AirflowState& flow, double u_x, double u_z, const ForceModelConfig& cfg);

/// Columns 0-2 are thrusters, 3-7 aerodynamics.
ForcePrediction predict_forces(const Regressor& phi, const ForceParams& p);

/// Thruster part of the regressor only.
Regressor thrust_columns(const Regressor& phi);
/// Aerodynamic part of the regressor only.
Regressor aero_columns(const Regressor& phi);

}  // namespace vtol
