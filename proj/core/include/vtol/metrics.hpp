#pragma once

#include <limits>
#include <vector>

#include "vtol/plant.hpp"
#include "vtol/telemetry.hpp"

namespace vtol {

inline constexpr double kAllTime = std::numeric_limits<double>::infinity();

/// Constant-throttle segment of a wind schedule.
struct Plateau {
  double start = 0.0;
  double end = 0.0;
  double throttle = 0.0;
};

std::vector<Plateau> plateaus(const WindSchedule& wind, double duration);

/// Statistics of |v_err| and |e| over rows with t in [t0, t1).
double rms_verr(const Telemetry& tel, double t0 = -kAllTime, double t1 = kAllTime);
double max_verr(const Telemetry& tel, double t0 = -kAllTime, double t1 = kAllTime);
double mean_pred_err(const Telemetry& tel, double t0 = -kAllTime, double t1 = kAllTime);

struct PlateauStats {
  Plateau plateau;
  double mean_pred_err = 0.0;  // after the settling time
  double rms_verr = 0.0;       // after the settling time
  double envelope = 0.0;       // max Lyapunov value during the settling time
  double max_after = 0.0;      // max Lyapunov value after it
  bool trapped = false;        // max_after <= factor * envelope
};

/// Per-plateau statistics; the first `settle` seconds of each plateau are
/// treated as transient. Plateaus shorter than the settling time are skipped.
std::vector<PlateauStats> plateau_stats(const Telemetry& tel, const WindSchedule& wind, double duration,
                                        double settle = 2.0, double factor = 1.05);

struct DecayFit {
  double step_time = 0.0;
  double peak = 0.0;       // max |v_err| after the step
  double peak_time = 0.0;
  double rate = 0.0;       // 1/s, from a log-linear fit
  std::size_t samples = 0;
  bool fitted = false;
};

/// Exponential decay of |v_err| after a step at `step_time`: locate the peak
/// within `window` seconds, then fit log|v_err| against time from the peak
/// until the error first falls below floor_fraction * peak.
DecayFit fit_decay(const Telemetry& tel, double step_time, double window, double floor_fraction = 0.3);

}  // namespace vtol
