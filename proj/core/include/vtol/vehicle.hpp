#pragma once

#include "vtol/forcemodel.hpp"

namespace vtol {

/// Airframe and propulsion data of the reference aircraft.
struct VehicleSpec {
  double mass = 1.70;                     // kg
  double wingspan = 1.08;                 // m
  double wing_area = 0.223;               // m^2
  double lift_prop_diameter = 6.0 * 0.0254;   // m
  double front_prop_diameter = 7.0 * 0.0254;  // m
  int lift_rotor_count = 4;
  // Prop speed at full throttle, rad/s. Not published; chosen so that the
  // lift rotors hover near 60% throttle.
  double lift_prop_speed_max = 2500.0;
  double front_prop_speed_max = 2200.0;
};

/// Wind-tunnel / thrust-stand fit in its raw (dimensional) form, with the
/// posterior standard deviations.
struct RawForceFit {
  double ct_x = 3.02e-3, ct_x_std = 2.25e-5;
  double ct_z = 2.87e-3, ct_z_std = 5.00e-6;
  double cs = 2.31e-5, cs_std = 1.18e-5;
  double k1 = 1.425, k1_std = 0.010;
  double k2 = 3.126, k2_std = 0.087;
  double cl0 = 0.3705, cl0_std = 0.06523;
  double cl1 = 3.2502, cl1_std = 0.04434;
  double cd0 = 0.1551, cd0_std = 0.00394;
  double cd1 = 0.1782, cd1_std = 0.06518;
  double cd2 = 1.6000, cd2_std = 0.10820;
};

/// Per-parameter factors taking raw coefficients to mass-normalised ones.
/// theta_bar = scale .* theta_raw; aerodynamic entries have scale 1.
ParamVector normalisation_scale(const VehicleSpec& vehicle, const SideForceShape& shape, double rho);

struct NormalisedFit {
  ForceParams mean;
  ParamVector std = ParamVector::Zero();
  SideForceShape shape;
};

NormalisedFit normalise(const RawForceFit& raw, const VehicleSpec& vehicle, double rho);

/// Diagonal of the initial adaptation gain matrix.
ParamVector default_initial_gain();

ForceModelConfig default_force_model(const VehicleSpec& vehicle = {});

}  // namespace vtol
