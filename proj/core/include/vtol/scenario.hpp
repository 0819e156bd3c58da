#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vtol/adaptation.hpp"
#include "vtol/allocation.hpp"
#include "vtol/control.hpp"
#include "vtol/plant.hpp"
#include "vtol/vehicle.hpp"

namespace vtol {

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

enum class Scheme {
  kComposite = 1,       // I
  kCompositeFrozenGain, // II
  kTrackingOnly,        // III
  kPid,                 // IV
  kPd,                  // V
};

inline constexpr Scheme kAllSchemes[] = {Scheme::kComposite, Scheme::kCompositeFrozenGain,
                                         Scheme::kTrackingOnly, Scheme::kPid, Scheme::kPd};

/// Roman numeral label, "I" to "V".
std::string_view scheme_label(Scheme s);
std::string_view scheme_name(Scheme s);
/// Accepts the numeral or the name ("composite", "pid", ...).
Scheme parse_scheme(std::string_view text);
bool is_adaptive(Scheme s);
AdaptationLaw adaptation_law(Scheme s);

enum class InitPolicy { kPrior, kRandomInBounds };

struct SensorConfig {
  bool noise = true;
  double accel_sigma = 0.05;  // m/s^2
  ProbeCal probe;
  double blind_hold_time_constant = 1.0;  // s
  double airflow_filter_hz = 5.0;         // low-pass on the air-data estimate, 0 = off
};

struct AdaptationConfig {
  ParamVector p0 = default_initial_gain();
  double forgetting = 0.05;
  double damping = 0.1;
  double bound_sigma = 3.0;   // box half-width in posterior std
  double filter_hz = 10.0;
  double p_min_ratio = 1e-4;
  double p_max_ratio = 100.0;
};

struct AttitudeConfig {
  double omega_d_cutoff_hz = 5.0;
  double omega_d_max = 2.0;          // rad/s
  double omega_r_dot_cutoff_hz = 20.0;
};

struct TruthConfig {
  /// theta_true = theta0 + offset .* sigma
  ParamVector offset_sigma = (ParamVector() << -2, -2, 2, 2, 2, 2, -2, -2).finished();
  double disturbance = 0.0;           // m/s^2
  Vec3 inertia{0.045, 0.025, 0.065};  // kg m^2, principal
  double torque_limit = 2.0;          // N m
  double throttle_lag = 0.0;          // s
};

struct ScenarioConfig {
  std::string name = "comparison";
  Scheme scheme = Scheme::kComposite;
  std::uint64_t seed = 1;       // sensor noise
  std::uint64_t init_seed = 1;  // random initial estimate
  InitPolicy init = InitPolicy::kPrior;
  double duration = 50.0;       // s
  double dt = 0.004;            // s
  Vec3 initial_velocity = Vec3::Zero();  // m/s, inertial; starts at the origin, level
  WindSchedule wind;
  VehicleSpec vehicle;
  RawForceFit fit;
  SideForceAngle side_angle = SideForceAngle::kYOverZ;
  TruthConfig truth;
  TrackingGains tracking;
  PidGains pid;
  AdaptationConfig adaptation;
  AllocationConfig allocation;
  AttitudeConfig attitude;
  SensorConfig sensors;
  double lyapunov_gamma = 1.0;
  int decimation = 1;  // telemetry rows written to CSV: every n-th
};

/// Hover, 30% for 10 s, +10% every 5 s to 70%, hold 10 s, fan off for 10 s.
WindSchedule comparison_wind();
/// Hover, then 30%, 50% and 70% plateaus.
WindSchedule convergence_wind();

ScenarioConfig comparison_scenario();
ScenarioConfig convergence_scenario();

/// Throws ConfigError.
void validate(const ScenarioConfig& cfg);

/// Missing keys keep the defaults of `base`; unknown keys are rejected.
ScenarioConfig config_from_json(std::string_view text, const ScenarioConfig& base = comparison_scenario());
ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base = comparison_scenario());
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace vtol
