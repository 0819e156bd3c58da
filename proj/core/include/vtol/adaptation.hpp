#pragma once

#include "vtol/forcemodel.hpp"
#include "vtol/geom.hpp"
#include "vtol/sensors.hpp"

namespace vtol {

enum class AdaptationLaw {
  kComposite,           // tracking + prediction error, gain matrix with forgetting
  kCompositeFrozenGain, // same, P held at P0
  kTrackingOnly,        // theta_dot = P0 Phi^T R^T v_err
  kNone,
};

struct AdaptationGains {
  ParamVector p0 = ParamVector::Ones();  // diagonal of the initial gain
  double forgetting = 0.05;              // lambda, 1/s
  double damping = 0.1;                  // sigma, 1/s
  ForceParams theta0;                    // prior / damping anchor
  ParamVector bound = ParamVector::Constant(1e9);  // half-width of the box around theta0
  double p_min_ratio = 1e-4;             // p_min = ratio * min(P0)
  double p_max_ratio = 100.0;            // p_max = ratio * max(P0)

  double p_min() const { return p_min_ratio * p0.minCoeff(); }
  double p_max() const { return p_max_ratio * p0.maxCoeff(); }
};

struct AdaptationState {
  ForceParams theta_hat;
  ParamMatrix P = ParamMatrix::Identity();
  Regressor W = Regressor::Zero();  // filtered regressor
  Vec3 a_m = Vec3::Zero();          // filtered specific force measurement
};

AdaptationState initial_state(const AdaptationGains& gains, const ForceParams& theta_init);

/// e = W theta_hat - a_m.
Vec3 prediction_error(const Regressor& w, const ForceParams& theta_hat, const Vec3& a_m);

/// Component-wise clamp into theta0 +- bound.
ForceParams project(const ForceParams& theta, const AdaptationGains& gains);

/// Box projection in the metric of the gain matrix: coordinates that leave
/// the box are pinned to the bound and the remaining ones are shifted through
/// the off-diagonal gain coupling, then clamped. Same as project() for a
/// diagonal gain.
ForceParams project_in_metric(const ForceParams& theta, const ParamMatrix& p, const AdaptationGains& gains);

/// Symmetrise and clamp the eigenvalues into [p_min, p_max].
ParamMatrix condition_gain(const ParamMatrix& p, double p_min, double p_max);

/// One explicit Euler step of the parameter and gain laws.
AdaptationState update(const AdaptationState& st, const Regressor& phi, const Rotation& r,
                       const Vec3& v_err, const Vec3& e, const AdaptationGains& gains,
                       AdaptationLaw law, double dt);

/// Owns the matched low-pass filters for W and a_m and advances the
/// adaptation one control step at a time.
class CompositeAdapter {
 public:
  CompositeAdapter(AdaptationGains gains, AdaptationLaw law, const ForceParams& theta_init,
                   double filter_cutoff_hz = 10.0);

  /// Filters phi and the accelerometer sample, updates the estimate and
  /// returns the prediction error computed before the update.
  Vec3 step(const Regressor& phi, const Vec3& accel, const Rotation& r, const Vec3& v_err, double dt);

  const AdaptationState& state() const { return state_; }
  const AdaptationGains& gains() const { return gains_; }
  AdaptationLaw law() const { return law_; }

 private:
  AdaptationGains gains_;
  AdaptationLaw law_;
  AdaptationState state_;
  LowPass<Regressor> w_filter_;
  LowPass<Vec3> a_filter_;
};

}  // namespace vtol
