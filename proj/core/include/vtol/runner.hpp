#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vtol/metrics.hpp"
#include "vtol/scenario.hpp"
#include "vtol/telemetry.hpp"

namespace vtol {

struct RunSummary {
  Scheme scheme = Scheme::kComposite;
  std::size_t steps = 0;
  double rms_verr = 0.0;
  double max_verr = 0.0;
  double mean_pred_err = 0.0;
  ParamVector theta_init = ParamVector::Zero();
  ParamVector theta_final = ParamVector::Zero();
  ParamVector theta_true = ParamVector::Zero();
  /// Largest |zeta| / |q_v| seen with |q_v| > 1e-3.
  double coupling_estimate = 0.0;
  /// 4 lambda_min(Kv) lambda_min(Lq) / coupling^2, infinite if no coupling seen.
  double gamma_bound = 0.0;
  double max_orthonormality_error = 0.0;
  double max_gain_asymmetry = 0.0;  // max |P - P^T|
  bool gain_spd = true;             // P positive definite at every step
  bool diverged = false;
  std::string message;
};

struct RunResult {
  ScenarioConfig config;
  Telemetry telemetry;
  std::vector<Vec3> wind;  // wind sample used at each control step
  RunSummary summary;
};

/// Closed-loop simulation of one scenario. A diverged plant does not throw:
/// the telemetry up to the failure is kept and summary.diverged is set.
/// Throws ConfigError for an invalid configuration.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Initial estimate used by a run (prior mean or a seeded draw in the box).
ParamVector initial_estimate(const ScenarioConfig& cfg);
/// theta0 + offset .* sigma.
ParamVector true_parameters(const ScenarioConfig& cfg);

std::string summary_json(const RunSummary& s);
/// telemetry.csv and summary.json under dir (created if missing).
void write_run(const RunResult& run, const std::filesystem::path& dir);

struct StudyResult {
  std::vector<double> t;
  std::vector<ParamVector> mean;
  std::vector<ParamVector> std;  // population std over runs
  std::vector<RunSummary> runs;
};

/// Runs that differ only in the seed of the random initial estimate
/// (cfg.init_seed + i). Requires n_runs >= 2.
StudyResult convergence_study(const ScenarioConfig& cfg, int n_runs);
StudyResult convergence_study(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& init_seeds);
void write_study_csv(std::ostream& out, const StudyResult& study, int decimation = 1);

struct SchemeMetrics {
  Scheme scheme = Scheme::kComposite;
  double rms_verr = 0.0;
  double max_verr = 0.0;
  double mean_pred_err = 0.0;       // only meaningful for the composite schemes
  double worst_plateau_pred_err = 0.0;
  double post_fan_off_max = 0.0;    // max |v_err| in the window after the fan is switched off
  bool diverged = false;
};

struct ComparisonResult {
  double fan_off_time = -1.0;  // negative if the schedule never switches the fan off
  std::vector<SchemeMetrics> metrics;
  std::vector<RunResult> runs;
};

/// Time the wind returns to zero after its last nonzero plateau, or -1.
double fan_off_time(const WindSchedule& wind);

/// All five schemes on the same configuration, wind and seed.
ComparisonResult compare_controllers(const ScenarioConfig& cfg, double post_window = 10.0);
void write_comparison_csv(std::ostream& out, const ComparisonResult& cmp);
std::string comparison_table(const ComparisonResult& cmp);

}  // namespace vtol
