#include "vtol/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <Eigen/Cholesky>

namespace vtol {

namespace {

using json = nlohmann::json;

constexpr std::string_view kLabels[] = {"I", "II", "III", "IV", "V"};
constexpr std::string_view kNames[] = {"composite", "composite_frozen", "tracking_only", "pid", "pd"};

bool is_spd(const Mat3& m) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    return false;
  }
  return Eigen::LLT<Mat3>(m).info() == Eigen::Success;
}

int index_of(Scheme s) { return static_cast<int>(s) - 1; }

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) {
    throw ConfigError(fmt::format("{}: expected an object", where));
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : keys) {
      known = known || item.key() == k;
    }
    if (!known) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, item.key()));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type", where, key));
  }
}

template <int N>
void read_vec(const json& obj, const char* key, Eigen::Matrix<double, N, 1>& out, std::string_view where) {
  if (!obj.contains(key)) {
    return;
  }
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != N) {
    throw ConfigError(fmt::format("{}.{}: expected an array of {} numbers", where, key, N));
  }
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(fmt::format("{}.{}: expected numbers", where, key));
    }
    out[i] = v[i].get<double>();
  }
}

// A gain matrix is given as a scalar or as its diagonal.
void read_gain(const json& obj, const char* key, Mat3& out, std::string_view where) {
  if (!obj.contains(key)) {
    return;
  }
  const json& v = obj.at(key);
  if (v.is_number()) {
    out = v.get<double>() * Mat3::Identity();
    return;
  }
  Vec3 d = out.diagonal();
  read_vec<3>(obj, key, d, where);
  out = d.asDiagonal();
}

template <int N>
json vec_json(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) {
    a.push_back(v[i]);
  }
  return a;
}

json gain_json(const Mat3& m) { return vec_json<3>(Vec3(m.diagonal())); }

void read_wind(const json& w, WindSchedule& out) {
  only_keys(w, "wind", {"steps", "max_speed", "direction", "lag"});
  if (w.contains("steps")) {
    const json& steps = w.at("steps");
    if (!steps.is_array()) {
      throw ConfigError("wind.steps: expected an array of [time, throttle] pairs");
    }
    out.steps.clear();
    for (const auto& s : steps) {
      if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
        throw ConfigError("wind.steps: expected [time, throttle] pairs");
      }
      out.steps.push_back({s[0].get<double>(), s[1].get<double>()});
    }
  }
  read(w, "max_speed", out.max_speed, "wind");
  read_vec<3>(w, "direction", out.direction, "wind");
  read(w, "lag", out.lag_time_constant, "wind");
}

void read_vehicle(const json& v, VehicleSpec& out) {
  only_keys(v, "vehicle", {"mass", "wing_area", "lift_prop_diameter", "front_prop_diameter",
                           "lift_rotor_count", "lift_prop_speed_max", "front_prop_speed_max"});
  read(v, "mass", out.mass, "vehicle");
  read(v, "wing_area", out.wing_area, "vehicle");
  read(v, "lift_prop_diameter", out.lift_prop_diameter, "vehicle");
  read(v, "front_prop_diameter", out.front_prop_diameter, "vehicle");
  read(v, "lift_rotor_count", out.lift_rotor_count, "vehicle");
  read(v, "lift_prop_speed_max", out.lift_prop_speed_max, "vehicle");
  read(v, "front_prop_speed_max", out.front_prop_speed_max, "vehicle");
}

}  // namespace

std::string_view scheme_label(Scheme s) { return kLabels[index_of(s)]; }
std::string_view scheme_name(Scheme s) { return kNames[index_of(s)]; }

Scheme parse_scheme(std::string_view text) {
  for (Scheme s : kAllSchemes) {
    if (text == scheme_label(s) || text == scheme_name(s)) {
      return s;
    }
  }
  throw ConfigError(fmt::format("unknown scheme '{}'", text));
}

bool is_adaptive(Scheme s) {
  return s == Scheme::kComposite || s == Scheme::kCompositeFrozenGain || s == Scheme::kTrackingOnly;
}

AdaptationLaw adaptation_law(Scheme s) {
  switch (s) {
    case Scheme::kComposite:
      return AdaptationLaw::kComposite;
    case Scheme::kCompositeFrozenGain:
      return AdaptationLaw::kCompositeFrozenGain;
    case Scheme::kTrackingOnly:
      return AdaptationLaw::kTrackingOnly;
    default:
      return AdaptationLaw::kNone;
  }
}

WindSchedule comparison_wind() {
  WindSchedule w;
  w.steps = {{0.0, 0.0}, {5.0, 0.3}, {15.0, 0.4}, {20.0, 0.5}, {25.0, 0.6}, {30.0, 0.7}, {40.0, 0.0}};
  return w;
}

WindSchedule convergence_wind() {
  WindSchedule w;
  w.steps = {{0.0, 0.0}, {5.0, 0.3}, {15.0, 0.5}, {25.0, 0.7}};
  return w;
}

ScenarioConfig comparison_scenario() {
  ScenarioConfig cfg;
  cfg.name = "comparison";
  cfg.wind = comparison_wind();
  cfg.duration = 50.0;
  return cfg;
}

ScenarioConfig convergence_scenario() {
  ScenarioConfig cfg;
  cfg.name = "convergence";
  cfg.wind = convergence_wind();
  cfg.duration = 40.0;
  cfg.init = InitPolicy::kRandomInBounds;
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  auto require = [](bool ok, std::string_view msg) {
    if (!ok) {
      throw ConfigError(std::string(msg));
    }
  };
  require(std::isfinite(cfg.duration) && cfg.duration > 0.0, "duration must be positive");
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0 && cfg.dt <= 0.01, "dt must be in (0, 0.01]");
  require(cfg.duration >= cfg.dt, "duration shorter than one step");
  require(cfg.initial_velocity.allFinite(), "initial_velocity must be finite");
  require(cfg.decimation >= 1, "decimation must be at least 1");
  require(is_spd(cfg.tracking.lambda_p) && is_spd(cfg.tracking.lambda_q) && is_spd(cfg.tracking.k_v) &&
              is_spd(cfg.tracking.k_omega),
          "tracking gains must be symmetric positive definite");
  require(is_spd(cfg.pid.k_p) && is_spd(cfg.pid.k_i) && is_spd(cfg.pid.k_d), "pid gains must be symmetric positive definite");
  require(cfg.pid.integral_limit > 0.0, "pid.integral_limit must be positive");
  require(cfg.vehicle.mass > 0.0 && cfg.vehicle.wing_area > 0.0, "vehicle mass and wing area must be positive");
  require(cfg.vehicle.lift_rotor_count > 0, "lift rotor count must be positive");
  require(cfg.vehicle.lift_prop_speed_max > 0.0 && cfg.vehicle.front_prop_speed_max > 0.0,
          "prop speeds must be positive");
  require((cfg.adaptation.p0.array() > 0.0).all(), "adaptation.p0 must be positive");
  require(cfg.adaptation.forgetting >= 0.0 && cfg.adaptation.damping >= 0.0,
          "forgetting and damping must be non-negative");
  require(cfg.adaptation.bound_sigma > 0.0, "adaptation.bound_sigma must be positive");
  require(cfg.adaptation.filter_hz > 0.0, "adaptation.filter_hz must be positive");
  require(cfg.adaptation.p_min_ratio > 0.0 && cfg.adaptation.p_max_ratio >= 1.0,
          "gain clamp ratios out of range");
  require(cfg.allocation.alpha_max > 0.0, "allocation.alpha_max must be positive");
  require(cfg.attitude.omega_d_cutoff_hz > 0.0 && cfg.attitude.omega_r_dot_cutoff_hz > 0.0 &&
              cfg.attitude.omega_d_max > 0.0,
          "attitude filter settings must be positive");
  require(cfg.sensors.accel_sigma >= 0.0 && cfg.sensors.probe.noise_pa >= 0.0, "noise must be non-negative");
  require(cfg.sensors.probe.k > 0.0, "probe gain must be positive");
  require(cfg.sensors.airflow_filter_hz >= 0.0, "airflow filter cutoff must be non-negative");
  require(cfg.truth.inertia.minCoeff() > 0.0, "inertia must be positive");
  require(cfg.truth.torque_limit > 0.0, "torque limit must be positive");
  require(cfg.truth.throttle_lag >= 0.0, "throttle lag must be non-negative");
  require(cfg.lyapunov_gamma > 0.0, "lyapunov_gamma must be positive");
  require(!cfg.wind.steps.empty(), "wind schedule needs at least one step");
  try {
    cfg.wind.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("wind: ") + e.what());
  }
}

ScenarioConfig config_from_json(std::string_view text, const ScenarioConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"name", "scheme", "seed", "init_seed", "init", "duration", "dt", "initial_velocity", "wind",
                          "vehicle", "model", "truth", "gains", "pid", "adaptation", "allocation",
                          "attitude", "sensors", "lyapunov_gamma", "decimation"});
  ScenarioConfig cfg = base;
  read(j, "name", cfg.name, "config");
  if (j.contains("scheme")) {
    if (!j.at("scheme").is_string()) {
      throw ConfigError("config.scheme: expected a string");
    }
    cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
  }
  read(j, "seed", cfg.seed, "config");
  read(j, "init_seed", cfg.init_seed, "config");
  if (j.contains("init")) {
    std::string init;
    read(j, "init", init, "config");
    if (init == "prior") {
      cfg.init = InitPolicy::kPrior;
    } else if (init == "random") {
      cfg.init = InitPolicy::kRandomInBounds;
    } else {
      throw ConfigError("config.init: expected 'prior' or 'random'");
    }
  }
  read(j, "duration", cfg.duration, "config");
  read(j, "dt", cfg.dt, "config");
  read_vec<3>(j, "initial_velocity", cfg.initial_velocity, "config");
  read(j, "lyapunov_gamma", cfg.lyapunov_gamma, "config");
  read(j, "decimation", cfg.decimation, "config");

  if (j.contains("wind")) {
    read_wind(j.at("wind"), cfg.wind);
  }
  if (j.contains("vehicle")) {
    read_vehicle(j.at("vehicle"), cfg.vehicle);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    only_keys(m, "model", {"side_force_angle"});
    std::string angle = cfg.side_angle == SideForceAngle::kYOverZ ? "y_over_z" : "y_over_x";
    read(m, "side_force_angle", angle, "model");
    if (angle == "y_over_z") {
      cfg.side_angle = SideForceAngle::kYOverZ;
    } else if (angle == "y_over_x") {
      cfg.side_angle = SideForceAngle::kYOverX;
    } else {
      throw ConfigError("model.side_force_angle: expected 'y_over_z' or 'y_over_x'");
    }
  }
  if (j.contains("truth")) {
    const json& t = j.at("truth");
    only_keys(t, "truth", {"offset_sigma", "disturbance", "inertia", "torque_limit", "throttle_lag"});
    read_vec<kNumParams>(t, "offset_sigma", cfg.truth.offset_sigma, "truth");
    read(t, "disturbance", cfg.truth.disturbance, "truth");
    read_vec<3>(t, "inertia", cfg.truth.inertia, "truth");
    read(t, "torque_limit", cfg.truth.torque_limit, "truth");
    read(t, "throttle_lag", cfg.truth.throttle_lag, "truth");
  }
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    only_keys(g, "gains", {"lambda_p", "lambda_q", "k_v", "k_omega"});
    read_gain(g, "lambda_p", cfg.tracking.lambda_p, "gains");
    read_gain(g, "lambda_q", cfg.tracking.lambda_q, "gains");
    read_gain(g, "k_v", cfg.tracking.k_v, "gains");
    read_gain(g, "k_omega", cfg.tracking.k_omega, "gains");
  }
  if (j.contains("pid")) {
    const json& g = j.at("pid");
    only_keys(g, "pid", {"k_p", "k_i", "k_d", "integral_limit"});
    read_gain(g, "k_p", cfg.pid.k_p, "pid");
    read_gain(g, "k_i", cfg.pid.k_i, "pid");
    read_gain(g, "k_d", cfg.pid.k_d, "pid");
    read(g, "integral_limit", cfg.pid.integral_limit, "pid");
  }
  if (j.contains("adaptation")) {
    const json& a = j.at("adaptation");
    only_keys(a, "adaptation",
              {"p0", "forgetting", "damping", "bound_sigma", "filter_hz", "p_min_ratio", "p_max_ratio"});
    read_vec<kNumParams>(a, "p0", cfg.adaptation.p0, "adaptation");
    read(a, "forgetting", cfg.adaptation.forgetting, "adaptation");
    read(a, "damping", cfg.adaptation.damping, "adaptation");
    read(a, "bound_sigma", cfg.adaptation.bound_sigma, "adaptation");
    read(a, "filter_hz", cfg.adaptation.filter_hz, "adaptation");
    read(a, "p_min_ratio", cfg.adaptation.p_min_ratio, "adaptation");
    read(a, "p_max_ratio", cfg.adaptation.p_max_ratio, "adaptation");
  }
  if (j.contains("allocation")) {
    const json& a = j.at("allocation");
    only_keys(a, "allocation", {"alpha_max", "min_airspeed"});
    read(a, "alpha_max", cfg.allocation.alpha_max, "allocation");
    read(a, "min_airspeed", cfg.allocation.min_airspeed, "allocation");
  }
  if (j.contains("attitude")) {
    const json& a = j.at("attitude");
    only_keys(a, "attitude", {"omega_d_cutoff_hz", "omega_d_max", "omega_r_dot_cutoff_hz"});
    read(a, "omega_d_cutoff_hz", cfg.attitude.omega_d_cutoff_hz, "attitude");
    read(a, "omega_d_max", cfg.attitude.omega_d_max, "attitude");
    read(a, "omega_r_dot_cutoff_hz", cfg.attitude.omega_r_dot_cutoff_hz, "attitude");
  }
  if (j.contains("sensors")) {
    const json& s = j.at("sensors");
    only_keys(s, "sensors", {"noise", "accel_sigma", "probe_sigma", "probe_k", "blind_hold", "airflow_filter_hz"});
    read(s, "noise", cfg.sensors.noise, "sensors");
    read(s, "accel_sigma", cfg.sensors.accel_sigma, "sensors");
    read(s, "probe_sigma", cfg.sensors.probe.noise_pa, "sensors");
    read(s, "probe_k", cfg.sensors.probe.k, "sensors");
    read(s, "blind_hold", cfg.sensors.blind_hold_time_constant, "sensors");
    read(s, "airflow_filter_hz", cfg.sensors.airflow_filter_hz, "sensors");
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), base);
}

std::string config_to_json(const ScenarioConfig& cfg) {
  json steps = json::array();
  for (const auto& s : cfg.wind.steps) {
    steps.push_back({s.start, s.throttle});
  }
  json j;
  j["name"] = cfg.name;
  j["scheme"] = std::string(scheme_label(cfg.scheme));
  j["seed"] = cfg.seed;
  j["init_seed"] = cfg.init_seed;
  j["init"] = cfg.init == InitPolicy::kPrior ? "prior" : "random";
  j["duration"] = cfg.duration;
  j["dt"] = cfg.dt;
  j["initial_velocity"] = vec_json<3>(cfg.initial_velocity);
  j["wind"] = {{"steps", steps},
               {"max_speed", cfg.wind.max_speed},
               {"direction", vec_json<3>(cfg.wind.direction)},
               {"lag", cfg.wind.lag_time_constant}};
  j["vehicle"] = {{"mass", cfg.vehicle.mass},
                  {"wing_area", cfg.vehicle.wing_area},
                  {"lift_prop_diameter", cfg.vehicle.lift_prop_diameter},
                  {"front_prop_diameter", cfg.vehicle.front_prop_diameter},
                  {"lift_rotor_count", cfg.vehicle.lift_rotor_count},
                  {"lift_prop_speed_max", cfg.vehicle.lift_prop_speed_max},
                  {"front_prop_speed_max", cfg.vehicle.front_prop_speed_max}};
  j["model"] = {{"side_force_angle", cfg.side_angle == SideForceAngle::kYOverZ ? "y_over_z" : "y_over_x"}};
  j["truth"] = {{"offset_sigma", vec_json<kNumParams>(cfg.truth.offset_sigma)},
                {"disturbance", cfg.truth.disturbance},
                {"inertia", vec_json<3>(cfg.truth.inertia)},
                {"torque_limit", cfg.truth.torque_limit},
                {"throttle_lag", cfg.truth.throttle_lag}};
  j["gains"] = {{"lambda_p", gain_json(cfg.tracking.lambda_p)},
                {"lambda_q", gain_json(cfg.tracking.lambda_q)},
                {"k_v", gain_json(cfg.tracking.k_v)},
                {"k_omega", gain_json(cfg.tracking.k_omega)}};
  j["pid"] = {{"k_p", gain_json(cfg.pid.k_p)},
              {"k_i", gain_json(cfg.pid.k_i)},
              {"k_d", gain_json(cfg.pid.k_d)},
              {"integral_limit", cfg.pid.integral_limit}};
  j["adaptation"] = {{"p0", vec_json<kNumParams>(cfg.adaptation.p0)},
                     {"forgetting", cfg.adaptation.forgetting},
                     {"damping", cfg.adaptation.damping},
                     {"bound_sigma", cfg.adaptation.bound_sigma},
                     {"filter_hz", cfg.adaptation.filter_hz},
                     {"p_min_ratio", cfg.adaptation.p_min_ratio},
                     {"p_max_ratio", cfg.adaptation.p_max_ratio}};
  j["allocation"] = {{"alpha_max", cfg.allocation.alpha_max},
                     {"min_airspeed", cfg.allocation.min_airspeed}};
  j["attitude"] = {{"omega_d_cutoff_hz", cfg.attitude.omega_d_cutoff_hz},
                   {"omega_d_max", cfg.attitude.omega_d_max},
                   {"omega_r_dot_cutoff_hz", cfg.attitude.omega_r_dot_cutoff_hz}};
  j["sensors"] = {{"noise", cfg.sensors.noise},
                  {"accel_sigma", cfg.sensors.accel_sigma},
                  {"probe_sigma", cfg.sensors.probe.noise_pa},
                  {"probe_k", cfg.sensors.probe.k},
                  {"blind_hold", cfg.sensors.blind_hold_time_constant},
                  {"airflow_filter_hz", cfg.sensors.airflow_filter_hz}};
  j["lyapunov_gamma"] = cfg.lyapunov_gamma;
  j["decimation"] = cfg.decimation;
  return j.dump(2) + "\n";
}

}  // namespace vtol
