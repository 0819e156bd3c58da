#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vtol/forcemodel.hpp"
#include "vtol/geom.hpp"

namespace vtol {

/// One control step, sampled before the plant is advanced.
struct TelemetryRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 v_err = Vec3::Zero();
  Eigen::Vector4d q = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);  // w, x, y, z
  Vec3 omega = Vec3::Zero();
  double alpha = 0.0;     // measured
  double beta = 0.0;      // measured
  double airspeed = 0.0;  // measured
  double u_x = 0.0;
  double u_z = 0.0;
  ParamVector theta_hat = ParamVector::Zero();
  Vec3 e = Vec3::Zero();  // filtered prediction error
  double lyapunov = 0.0;
  Vec3 zeta = Vec3::Zero();  // inertial force allocation residual
};

struct Telemetry {
  std::vector<TelemetryRow> rows;
};

std::string telemetry_header();
/// Writes every `decimation`-th row. Numbers use the shortest round-trip form.
void write_telemetry_csv(std::ostream& out, const Telemetry& tel, int decimation = 1);

}  // namespace vtol
