#include "vtol/vehicle.hpp"

#include <cmath>

namespace vtol {

ParamVector normalisation_scale(const VehicleSpec& vehicle, const SideForceShape& shape, double rho) {
  const double n_lift = vehicle.lift_prop_speed_max;
  const double n_front = vehicle.front_prop_speed_max;
  const double rotors = vehicle.lift_rotor_count;

  ParamVector s = ParamVector::Ones();
  // T = C_T rho d^4 n^2 with n = n_max * u
  s[static_cast<int>(Param::kThrustX)] =
      rho * std::pow(vehicle.front_prop_diameter, 4) * n_front * n_front / vehicle.mass;
  s[static_cast<int>(Param::kThrustZ)] =
      rotors * rho * std::pow(vehicle.lift_prop_diameter, 4) * n_lift * n_lift / vehicle.mass;
  // F_S = C_S rho n^k1 V^(2-k1) d^(2+k1) (...); the basis keeps u^k1, V and d
  s[static_cast<int>(Param::kSideForce)] =
      rotors * rho * std::pow(n_lift, shape.k1) / vehicle.mass;
  return s;
}

NormalisedFit normalise(const RawForceFit& raw, const VehicleSpec& vehicle, double rho) {
  NormalisedFit fit;
  fit.shape = {raw.k1, raw.k2, vehicle.lift_prop_diameter};

  ParamVector mean;
  mean << raw.ct_x, raw.ct_z, raw.cs, raw.cd0, raw.cd1, raw.cd2, raw.cl0, raw.cl1;
  ParamVector std;
  std << raw.ct_x_std, raw.ct_z_std, raw.cs_std, raw.cd0_std, raw.cd1_std, raw.cd2_std,
      raw.cl0_std, raw.cl1_std;

  const ParamVector scale = normalisation_scale(vehicle, fit.shape, rho);
  fit.mean.theta = scale.cwiseProduct(mean);
  fit.std = scale.cwiseProduct(std);
  return fit;
}

ParamVector default_initial_gain() {
  ParamVector p;
  p << 200.0, 200.0, 0.1, 1.0, 5.0, 20.0, 0.1, 0.1;
  return p;
}

ForceModelConfig default_force_model(const VehicleSpec& vehicle) {
  ForceModelConfig cfg;
  cfg.aero = {1.225, vehicle.wing_area, vehicle.mass};
  cfg.shape.diameter = vehicle.lift_prop_diameter;
  return cfg;
}

}  // namespace vtol
