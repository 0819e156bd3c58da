#include "vtol/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iterator>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vtol/adaptation.hpp"
#include "vtol/allocation.hpp"
#include "vtol/control.hpp"
#include "vtol/sensors.hpp"

namespace vtol {

namespace {

struct Setup {
  NormalisedFit fit;
  ForceModelConfig model;
  PlantTruth truth;
  AdaptationGains gains;
  ParamVector theta_init;
};

AdaptationGains make_gains(const ScenarioConfig& cfg, const NormalisedFit& fit) {
  AdaptationGains g;
  g.p0 = cfg.adaptation.p0;
  g.forgetting = cfg.adaptation.forgetting;
  g.damping = cfg.adaptation.damping;
  g.theta0 = fit.mean;
  g.bound = cfg.adaptation.bound_sigma * fit.std;
  g.p_min_ratio = cfg.adaptation.p_min_ratio;
  g.p_max_ratio = cfg.adaptation.p_max_ratio;
  return g;
}

Setup make_setup(const ScenarioConfig& cfg) {
  Setup s;
  s.fit = normalise(cfg.fit, cfg.vehicle, AeroConstants{}.rho);
  s.model = default_force_model(cfg.vehicle);
  s.model.shape = s.fit.shape;
  s.model.side_angle = cfg.side_angle;

  s.truth.theta.theta = s.fit.mean.theta + cfg.truth.offset_sigma.cwiseProduct(s.fit.std);
  s.truth.model = s.model;
  s.truth.inertia = cfg.truth.inertia.asDiagonal();
  s.truth.disturbance.amplitude = cfg.truth.disturbance;
  s.truth.torque_limit = cfg.truth.torque_limit;

  s.gains = make_gains(cfg, s.fit);
  s.theta_init = s.fit.mean.theta;
  if (cfg.init == InitPolicy::kRandomInBounds && is_adaptive(cfg.scheme)) {
    Rng rng(cfg.init_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < kNumParams; ++i) {
      s.theta_init[i] += unit(rng) * s.gains.bound[i];
    }
  }
  return s;
}

Eigen::Vector4d quat_row(const Rotation& r) {
  const Eigen::Quaterniond q = r.quaternion();
  return {q.w(), q.x(), q.y(), q.z()};
}

double min_eig(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Mat3>(sym).eigenvalues().minCoeff();
}

}  // namespace

ParamVector initial_estimate(const ScenarioConfig& cfg) { return make_setup(cfg).theta_init; }

ParamVector true_parameters(const ScenarioConfig& cfg) { return make_setup(cfg).truth.theta.theta; }

RunResult run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  const Setup su = make_setup(cfg);
  const double dt = cfg.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.duration / dt));
  const Scheme scheme = cfg.scheme;
  const bool adaptive = is_adaptive(scheme);

  RunResult res;
  res.config = cfg;
  res.telemetry.rows.reserve(n_steps);
  res.wind.reserve(n_steps);
  RunSummary& sum = res.summary;
  sum.scheme = scheme;
  sum.theta_true = su.truth.theta.theta;
  sum.theta_init = su.theta_init;

  Rng rng(cfg.seed);
  ProbeCal probe = cfg.sensors.probe;
  double accel_sigma = cfg.sensors.accel_sigma;
  if (!cfg.sensors.noise) {
    probe.noise_pa = 0.0;
    accel_sigma = 0.0;
  }
  AirflowEstimator airflow(probe, cfg.sensors.blind_hold_time_constant);
  const bool filter_airflow = cfg.sensors.airflow_filter_hz > 0.0;
  LowPass<Vec3> airflow_filter(filter_airflow ? cfg.sensors.airflow_filter_hz : 1.0, Vec3::Zero());

  ForceParams theta_init;
  theta_init.theta = su.theta_init;
  CompositeAdapter adapter(su.gains, adaptation_law(scheme), theta_init, cfg.adaptation.filter_hz);
  PidForceController pid(cfg.pid, scheme == Scheme::kPid);
  AttitudeRateEstimator omega_d_est(cfg.attitude.omega_d_cutoff_hz, cfg.attitude.omega_d_max);
  FilteredDerivative omega_r_rate(cfg.attitude.omega_r_dot_cutoff_hz);
  ThrottleLag lag(cfg.truth.throttle_lag);
  const ReferenceTrajectory reference = hold_position(Vec3::Zero());
  const TrackingGains& gains = cfg.tracking;
  const ParamMatrix p0 = cfg.adaptation.p0.asDiagonal();
  const bool gain_adapts = scheme == Scheme::kComposite;

  RigidBodyState x;
  x.v = cfg.initial_velocity;
  ActuatorCommand applied;
  applied.u_z = std::sqrt(std::clamp(kGravity.z() / std::max(su.theta_init[1], 1e-9), 0.0, 1.0));
  lag.reset(applied);

  const double cv = min_eig(gains.k_v);
  const double cq = min_eig(gains.lambda_q);

  try {
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Vec3 wind = wind_at(t, cfg.wind);

      // Sensing, with the command currently acting on the plant.
      const Vec3 f_b = true_body_force(x, applied, wind, su.truth);
      const Vec3 accel = accel_measure(f_b, accel_sigma, rng);
      Vec3 v_i = airflow.update(incident_velocity(x.v, wind, x.R), dt, rng);
      if (filter_airflow) {
        v_i = airflow_filter.update(v_i, dt);
      }
      const AirflowState flow = airflow_angles(v_i, su.model);
      const Regressor phi = regressor(flow, applied.u_x, applied.u_z, su.model);

      const ReferenceVelocity rv = reference_velocity(x.p, x.v, reference(t), gains.lambda_p);
      const Vec3 v_err = x.v - rv.v_r;
      const Vec3 e = adapter.step(phi, accel, x.R, v_err, dt);
      const ForceParams& theta_hat = adapter.state().theta_hat;

      const Vec3 f_cmd = adaptive ? force_command(x.v, rv.v_r, rv.v_r_dot, gains.k_v) : pid.update(v_err, dt);
      const AllocationResult alloc = allocate(f_cmd, x.R, flow, theta_hat, su.model, cfg.allocation);

      const Vec3 omega_d = omega_d_est.update(alloc.r_d, dt);
      const Vec3 omega_r = reference_omega(x.R, alloc.r_d, omega_d, gains.lambda_q);
      const Vec3 omega_r_dot = omega_r_rate.update(omega_r, dt);
      const Vec3 torque = moment_command(su.truth.inertia, x.omega, omega_r, omega_r_dot, gains.k_omega);
      const ActuatorCommand cmd = saturate({alloc.u_x, alloc.u_z, torque}, su.truth.torque_limit);

      // Diagnostics.
      const ErrorQuat q_err = attitude_error(alloc.r_d, x.R);
      const Vec3 zeta = -(x.R * alloc.residual);
      const double qv = q_err.qv.norm();
      if (qv > 1e-3) {
        sum.coupling_estimate = std::max(sum.coupling_estimate, zeta.norm() / qv);
      }
      const ParamMatrix& p = gain_adapts ? adapter.state().P : p0;
      const Eigen::LLT<ParamMatrix> llt(p);
      if (gain_adapts) {
        sum.max_gain_asymmetry = std::max(sum.max_gain_asymmetry, (p - p.transpose()).cwiseAbs().maxCoeff());
        sum.gain_spd = sum.gain_spd && llt.info() == Eigen::Success;
      }
      const ParamVector theta_err = theta_hat.theta - su.truth.theta.theta;
      const double lyap = 0.5 * v_err.squaredNorm() + (2.0 - 2.0 * q_err.q0) / cfg.lyapunov_gamma +
                          0.5 * theta_err.dot(llt.solve(theta_err));

      TelemetryRow row;
      row.t = t;
      row.p = x.p;
      row.v = x.v;
      row.v_err = v_err;
      row.q = quat_row(x.R);
      row.omega = x.omega;
      row.alpha = flow.alpha;
      row.beta = flow.beta;
      row.airspeed = flow.airspeed;
      row.u_x = cmd.u_x;
      row.u_z = cmd.u_z;
      row.theta_hat = theta_hat.theta;
      row.e = e;
      row.lyapunov = lyap;
      row.zeta = zeta;
      res.telemetry.rows.push_back(row);
      res.wind.push_back(wind);

      applied = lag.apply(cmd, dt);
      x = step(x, applied, cfg.wind, t, dt, su.truth);
      sum.max_orthonormality_error = std::max(sum.max_orthonormality_error, x.R.orthonormality_error());
    }
  } catch (const DivergedError& err) {
    sum.diverged = true;
    sum.message = err.what();
  }

  sum.steps = res.telemetry.rows.size();
  sum.rms_verr = rms_verr(res.telemetry);
  sum.max_verr = max_verr(res.telemetry);
  sum.mean_pred_err = mean_pred_err(res.telemetry);
  sum.theta_final = adapter.state().theta_hat.theta;
  sum.gamma_bound = sum.coupling_estimate > 0.0
                        ? 4.0 * cv * cq / (sum.coupling_estimate * sum.coupling_estimate)
                        : std::numeric_limits<double>::infinity();
  return res;
}

std::string summary_json(const RunSummary& s) {
  using json = nlohmann::json;
  auto vec = [](const ParamVector& v) {
    json o = json::object();
    for (int i = 0; i < kNumParams; ++i) {
      o[std::string(kParamNames[static_cast<std::size_t>(i)])] = v[i];
    }
    return o;
  };
  json j;
  j["scheme"] = std::string(scheme_label(s.scheme));
  j["steps"] = s.steps;
  j["diverged"] = s.diverged;
  if (s.diverged) {
    j["message"] = s.message;
  }
  j["rms_verr"] = s.rms_verr;
  j["max_verr"] = s.max_verr;
  j["mean_pred_err"] = s.mean_pred_err;
  j["theta_final"] = vec(s.theta_final);
  j["theta_init"] = vec(s.theta_init);
  j["theta_true"] = vec(s.theta_true);
  j["coupling_estimate"] = s.coupling_estimate;
  if (std::isfinite(s.gamma_bound)) {
    j["gamma_bound"] = s.gamma_bound;
  } else {
    j["gamma_bound"] = nullptr;
  }
  j["max_orthonormality_error"] = s.max_orthonormality_error;
  j["gain_spd"] = s.gain_spd;
  return j.dump(2) + "\n";
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "telemetry.csv", std::ios::binary);
    write_telemetry_csv(out, run.telemetry, run.config.decimation);
  }
  std::ofstream out(dir / "summary.json", std::ios::binary);
  out << summary_json(run.summary);
}

StudyResult convergence_study(const ScenarioConfig& cfg, int n_runs) {
  if (n_runs < 2) {
    throw ConfigError("a convergence study needs at least 2 runs");
  }
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n_runs; ++i) {
    seeds.push_back(cfg.init_seed + static_cast<std::uint64_t>(i));
  }
  return convergence_study(cfg, seeds);
}

StudyResult convergence_study(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& init_seeds) {
  if (init_seeds.size() < 2) {
    throw ConfigError("a convergence study needs at least 2 runs");
  }
  validate(cfg);
  std::vector<std::future<RunResult>> jobs;
  for (auto seed : init_seeds) {
    ScenarioConfig c = cfg;
    c.init = InitPolicy::kRandomInBounds;
    c.init_seed = seed;
    jobs.push_back(std::async(std::launch::async, [c] { return run_scenario(c); }));
  }
  std::vector<RunResult> runs;
  for (auto& j : jobs) {
    runs.push_back(j.get());
  }

  StudyResult out;
  std::size_t len = runs.front().telemetry.rows.size();
  for (const auto& r : runs) {
    len = std::min(len, r.telemetry.rows.size());
    out.runs.push_back(r.summary);
  }
  const double n = static_cast<double>(runs.size());
  for (std::size_t k = 0; k < len; ++k) {
    ParamVector mean = ParamVector::Zero();
    for (const auto& r : runs) {
      mean += r.telemetry.rows[k].theta_hat;
    }
    mean /= n;
    ParamVector var = ParamVector::Zero();
    for (const auto& r : runs) {
      var += (r.telemetry.rows[k].theta_hat - mean).cwiseAbs2();
    }
    out.t.push_back(runs.front().telemetry.rows[k].t);
    out.mean.push_back(mean);
    out.std.push_back((var / n).cwiseSqrt());
  }
  return out;
}

void write_study_csv(std::ostream& out, const StudyResult& study, int decimation) {
  const auto step = static_cast<std::size_t>(decimation < 1 ? 1 : decimation);
  out << "t";
  for (auto name : kParamNames) {
    out << ",mean_" << name;
  }
  for (auto name : kParamNames) {
    out << ",std_" << name;
  }
  out << '\n';
  fmt::memory_buffer buf;
  for (std::size_t k = 0; k < study.t.size(); k += step) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{}", study.t[k]);
    for (int i = 0; i < kNumParams; ++i) {
      fmt::format_to(std::back_inserter(buf), ",{}", study.mean[k][i]);
    }
    for (int i = 0; i < kNumParams; ++i) {
      fmt::format_to(std::back_inserter(buf), ",{}", study.std[k][i]);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

double fan_off_time(const WindSchedule& wind) {
  double t = -1.0;
  for (std::size_t i = 1; i < wind.steps.size(); ++i) {
    if (wind.steps[i].throttle == 0.0 && wind.steps[i - 1].throttle > 0.0) {
      t = wind.steps[i].start;
    }
  }
  return t;
}

ComparisonResult compare_controllers(const ScenarioConfig& cfg, double post_window) {
  validate(cfg);
  std::vector<std::future<RunResult>> jobs;
  for (Scheme s : kAllSchemes) {
    ScenarioConfig c = cfg;
    c.scheme = s;
    jobs.push_back(std::async(std::launch::async, [c] { return run_scenario(c); }));
  }
  ComparisonResult out;
  out.fan_off_time = fan_off_time(cfg.wind);
  for (auto& j : jobs) {
    out.runs.push_back(j.get());
  }
  for (const auto& run : out.runs) {
    SchemeMetrics m;
    m.scheme = run.summary.scheme;
    m.rms_verr = run.summary.rms_verr;
    m.max_verr = run.summary.max_verr;
    m.mean_pred_err = run.summary.mean_pred_err;
    m.diverged = run.summary.diverged;
    for (const auto& p : plateau_stats(run.telemetry, cfg.wind, cfg.duration)) {
      m.worst_plateau_pred_err = std::max(m.worst_plateau_pred_err, p.mean_pred_err);
    }
    if (out.fan_off_time >= 0.0) {
      m.post_fan_off_max = max_verr(run.telemetry, out.fan_off_time, out.fan_off_time + post_window);
    }
    out.metrics.push_back(m);
  }
  return out;
}

void write_comparison_csv(std::ostream& out, const ComparisonResult& cmp) {
  out << "scheme,name,rms_verr,max_verr,mean_pred_err,worst_plateau_pred_err,post_fan_off_max,diverged\n";
  for (const auto& m : cmp.metrics) {
    const bool composite = m.scheme == Scheme::kComposite || m.scheme == Scheme::kCompositeFrozenGain;
    out << fmt::format("{},{},{},{},{},{},{},{}\n", scheme_label(m.scheme), scheme_name(m.scheme), m.rms_verr,
                       m.max_verr, composite ? fmt::format("{}", m.mean_pred_err) : std::string(),
                       composite ? fmt::format("{}", m.worst_plateau_pred_err) : std::string(),
                       m.post_fan_off_max, m.diverged ? 1 : 0);
  }
}

std::string comparison_table(const ComparisonResult& cmp) {
  std::string s = fmt::format("{:<8}{:<18}{:>10}{:>10}{:>12}{:>14}{:>12}\n", "scheme", "name", "rms|v~|",
                              "max|v~|", "mean|e|", "plateau|e|", "post-off");
  for (const auto& m : cmp.metrics) {
    const bool composite = m.scheme == Scheme::kComposite || m.scheme == Scheme::kCompositeFrozenGain;
    s += fmt::format("{:<8}{:<18}{:>10.4f}{:>10.4f}{:>12}{:>14}{:>12.4f}{}\n", scheme_label(m.scheme),
                     scheme_name(m.scheme), m.rms_verr, m.max_verr,
                     composite ? fmt::format("{:.4f}", m.mean_pred_err) : "-",
                     composite ? fmt::format("{:.4f}", m.worst_plateau_pred_err) : "-", m.post_fan_off_max,
                     m.diverged ? "  diverged" : "");
  }
  return s;
}

}  // namespace vtol
