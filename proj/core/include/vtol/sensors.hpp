#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "vtol/geom.hpp"

namespace vtol {

using Rng = std::mt19937_64;

/// Differential pressures of the five-hole conic probe, Pa.
struct ProbeReading {
  double q_inf = 0.0;
  double q_alpha = 0.0;
  double q_beta = 0.0;
};

struct ProbeCal {
  double k = 2.0;
  double rho = 1.225;
  double noise_pa = 0.2;         // per channel, 1 sigma
  double min_forward_flow = 0.5; // m/s along body x
};

class SensorError : public std::invalid_argument {
 public:
  explicit SensorError(const std::string& what) : std::invalid_argument(what) {}
};

/// Synthetic probe pressures for a body-frame incident velocity.
/// Returns nullopt when the flow is not coming from ahead (probe blind).
std::optional<ProbeReading> probe_forward(const Vec3& v_incident, const ProbeCal& cal, Rng& rng);

/// Incident velocity from probe pressures. Throws SensorError if q_inf <= 0.
Vec3 probe_invert(const ProbeReading& r, const ProbeCal& cal);

/// Accelerometer: specific force plus white noise.
Vec3 accel_measure(const Vec3& f_b, double sigma, Rng& rng);

/// Discrete first-order low-pass y += c (x - y), c = dt 2 pi fc clamped to
/// (0,1]. Works element-wise on any Eigen type.
template <typename T>
class LowPass {
 public:
  explicit LowPass(double cutoff_hz) : cutoff_(cutoff_hz) {
    if (!(cutoff_hz > 0.0)) {
      throw std::invalid_argument("low-pass cutoff must be positive");
    }
  }

  LowPass(double cutoff_hz, const T& initial) : LowPass(cutoff_hz) {
    state_ = initial;
    primed_ = true;
  }

  const T& update(const T& x, double dt) {
    if (!primed_) {
      state_ = T::Zero(x.rows(), x.cols());
      primed_ = true;
    }
    state_ += coefficient(dt) * (x - state_);
    return state_;
  }

  double coefficient(double dt) const {
    return std::clamp(dt * 2.0 * std::numbers::pi * cutoff_, 1e-12, 1.0);
  }

  const T& value() const { return state_; }
  double cutoff() const { return cutoff_; }
  void reset(const T& value) {
    state_ = value;
    primed_ = true;
  }

 private:
  double cutoff_;
  T state_;
  bool primed_ = false;
};

/// Turns probe readings into an incident-velocity estimate. When the probe
/// is blind the last valid estimate is held and decays toward zero.
class AirflowEstimator {
 public:
  explicit AirflowEstimator(ProbeCal cal, double hold_time_constant = 1.0)
      : cal_(cal), hold_tau_(hold_time_constant) {}

  Vec3 update(const Vec3& v_incident_true, double dt, Rng& rng);

  const Vec3& estimate() const { return estimate_; }
  bool valid() const { return valid_; }

 private:
  ProbeCal cal_;
  double hold_tau_;
  Vec3 estimate_ = Vec3::Zero();
  bool valid_ = false;
};

}  // namespace vtol
