#include "vtol/sensors.hpp"

namespace vtol {

std::optional<ProbeReading> probe_forward(const Vec3& v_incident, const ProbeCal& cal, Rng& rng) {
  if (v_incident.x() <= cal.min_forward_flow) {
    return std::nullopt;
  }
  ProbeReading r;
  r.q_inf = 0.5 * cal.rho * v_incident.squaredNorm();
  r.q_beta = r.q_inf * v_incident.y() / (cal.k * v_incident.x());
  r.q_alpha = r.q_inf * v_incident.z() / (cal.k * v_incident.x());
  if (cal.noise_pa > 0.0) {
    std::normal_distribution<double> noise(0.0, cal.noise_pa);
    r.q_inf += noise(rng);
    r.q_alpha += noise(rng);
    r.q_beta += noise(rng);
  }
  return r;
}

Vec3 probe_invert(const ProbeReading& r, const ProbeCal& cal) {
  if (!(r.q_inf > 0.0)) {
    throw SensorError("probe reading has non-positive dynamic pressure");
  }
  const double kb = cal.k * r.q_beta;
  const double ka = cal.k * r.q_alpha;
  const double scale = std::sqrt(2.0 * (r.q_inf / cal.rho) / (r.q_inf * r.q_inf + kb * kb + ka * ka));
  return scale * Vec3(r.q_inf, kb, ka);
}

Vec3 accel_measure(const Vec3& f_b, double sigma, Rng& rng) {
  if (sigma <= 0.0) {
    return f_b;
  }
  std::normal_distribution<double> noise(0.0, sigma);
  const double nx = noise(rng);
  const double ny = noise(rng);
  const double nz = noise(rng);
  return f_b + Vec3(nx, ny, nz);
}

Vec3 AirflowEstimator::update(const Vec3& v_incident_true, double dt, Rng& rng) {
  const auto reading = probe_forward(v_incident_true, cal_, rng);
  if (reading && reading->q_inf > 0.0) {
    estimate_ = probe_invert(*reading, cal_);
    valid_ = true;
    return estimate_;
  }
  valid_ = false;
  if (hold_tau_ > 0.0) {
    estimate_ *= std::exp(-dt / hold_tau_);
  } else {
    estimate_.setZero();
  }
  return estimate_;
}

}  // namespace vtol
