#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vtol/forcemodel.hpp"
#include "vtol/sensors.hpp"

namespace vtol {

class SysidError : public std::runtime_error {
 public:
  explicit SysidError(const std::string& what) : std::runtime_error(what) {}
};

/// One force-balance sample. Rows with throttle == 0 are whole-airframe
/// aerodynamic rows (body-frame force); rows with throttle > 0 are single
/// lift-rotor rows (x: in-plane side force, z: thrust).
struct TunnelRow {
  double airspeed = 0.0;  // m/s
  double alpha = 0.0;     // rad
  double throttle = 0.0;
  Vec3 force = Vec3::Zero();  // N
  double sigma = 0.0;         // N, per component
};

using TunnelDataset = std::vector<TunnelRow>;

/// CSV with header V,alpha,u,Fx,Fy,Fz,sigma.
void write_dataset_csv(std::ostream& out, const TunnelDataset& ds);
/// Throws SysidError on a bad header or malformed row.
TunnelDataset read_dataset_csv(std::istream& in);

/// Test-rig truth in raw (dimensional) units.
struct TunnelModel {
  double cl0 = 0.3705, cl1 = 3.2502;
  double cd0 = 0.1551, cd1 = 0.1782, cd2 = 1.6000;
  double cs = 2.31e-5;  // rotor side-force coefficient
  double ct = 2.87e-3;  // rotor thrust coefficient
  SideForceShape shape;
  double rho = 1.225;
  double s_ref = 0.223;
  double prop_speed_max = 2500.0;  // rad/s at full throttle
};

struct TunnelGrid {
  std::vector<double> airspeeds;
  std::vector<double> alphas;
  std::vector<double> throttles;  // 0 produces airframe rows
};

/// Airframe grid at 3-9 m/s, -10..20 deg, and a rotor grid at +-45 deg.
TunnelGrid default_aero_grid();
TunnelGrid default_rotor_grid();

/// Forces from the model plus i.i.d. Gaussian noise of std sigma.
TunnelDataset synth_tunnel_data(const TunnelModel& truth, const TunnelGrid& grid, double sigma, Rng& rng);

/// Exact model force for one row's (V, alpha, u).
Vec3 tunnel_force(const TunnelModel& truth, double airspeed, double alpha, double throttle);

struct GaussianPrior {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Broad zero-mean prior for the five linear aerodynamic coefficients.
GaussianPrior weak_aero_prior();

/// Posterior over (CL0, CL1, CD0, CD1, CD2).
struct PosteriorFit {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::MatrixXd covariance;
  std::size_t rows_used = 0;
};

/// Conjugate Gaussian regression with known noise. Lift is regressed on
/// {1, a}, drag on {1, a, a^2}, both non-dimensionalised by q S.
/// Throws SysidError for fewer than 20 rows, fewer than 3 distinct alphas or
/// a rank-deficient design.
PosteriorFit fit_aero_linear(const TunnelDataset& ds, double rho, double s_ref,
                             const GaussianPrior& prior = weak_aero_prior());

struct SideForceGridSpec {
  double k1_min = 0.5, k1_max = 2.0, k1_step = 0.005;
  double k2_min = 0.5, k2_max = 6.0, k2_step = 0.05;
};

struct SideForceFit {
  double cs = 0.0;
  double cs_std = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double weighted_sse = 0.0;
  std::size_t rows_used = 0;
};

/// Grid search over (k1, k2) with the closed-form linear fit of C_S in each
/// cell. Ties go to the smaller k1.
SideForceFit fit_sideforce(const TunnelDataset& ds, double rho, double prop_speed_max, double diameter,
                           const SideForceGridSpec& grid = {});

enum class ProbeAxis { kAlpha, kBeta };

struct ProbeSample {
  double true_angle = 0.0;  // rad
  ProbeReading reading;
  ProbeAxis axis = ProbeAxis::kAlpha;
};

/// Sweep the probe through the given angles at fixed airspeed, averaging
/// samples_per_angle noisy readings at each angle.
std::vector<ProbeSample> synth_probe_sweep(const std::vector<double>& angles, double airspeed,
                                           ProbeAxis axis, const ProbeCal& cal, int samples_per_angle,
                                           Rng& rng);

struct ProbeFit {
  double k = 0.0;
  double rms_angle_error = 0.0;  // rad
  double slope = 0.0;            // estimated vs true angle
  double intercept = 0.0;
  double linearity = 0.0;        // max deviation from the line / full scale
};

/// Least-squares gain minimising the angle prediction error
/// atan(k q_axis / q_inf) - angle. Requires at least 5 samples.
ProbeFit fit_probe_gain(const std::vector<ProbeSample>& sweep);

/// Angle seen by the probe for a given gain.
double probe_angle(const ProbeReading& r, ProbeAxis axis, double k);

}  // namespace vtol
