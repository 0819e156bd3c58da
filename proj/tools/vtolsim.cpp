// vtolsim: scenario runner and wind-tunnel fitting front end.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vtol/runner.hpp"
#include "vtol/sysid.hpp"
#include "vtol/vehicle.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitDiverged = 2;
constexpr int kExitBadConfig = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON scenario file");
  cmd->add_option("--seed", c.seed, "sensor noise seed");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

vtol::ScenarioConfig load(const Common& c, const vtol::ScenarioConfig& base) {
  vtol::ScenarioConfig cfg = c.config.empty() ? base : vtol::load_config(c.config, base);
  if (c.seed) {
    cfg.seed = *c.seed;
  }
  vtol::validate(cfg);
  return cfg;
}

int cmd_run(const Common& c, const std::string& scheme) {
  vtol::ScenarioConfig cfg = load(c, vtol::comparison_scenario());
  if (!scheme.empty()) {
    cfg.scheme = vtol::parse_scheme(scheme);
  }
  const vtol::RunResult run = vtol::run_scenario(cfg);
  vtol::write_run(run, c.out);
  const auto& s = run.summary;
  fmt::print("scheme {}  steps {}  rms|v~| {:.4f}  max|v~| {:.4f}  mean|e| {:.4f}\n",
             vtol::scheme_label(s.scheme), s.steps, s.rms_verr, s.max_verr, s.mean_pred_err);
  fmt::print("wrote {}\n", (fs::path(c.out) / "telemetry.csv").string());
  if (s.diverged) {
    fmt::print(stderr, "diverged: {}\n", s.message);
    return kExitDiverged;
  }
  return 0;
}

int cmd_study(const Common& c, int runs) {
  const vtol::ScenarioConfig cfg = load(c, vtol::convergence_scenario());
  const vtol::StudyResult study = vtol::convergence_study(cfg, runs);
  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / "study.csv", std::ios::binary);
  vtol::write_study_csv(out, study, cfg.decimation);

  fmt::print("{:<6}{:>14}{:>14}{:>10}\n", "param", "std(t=0)", "std(end)", "ratio");
  for (int i = 0; i < vtol::kNumParams; ++i) {
    const double s0 = study.std.front()[i];
    const double s1 = study.std.back()[i];
    fmt::print("{:<6}{:>14.4e}{:>14.4e}{:>10.3f}\n", vtol::kParamNames[static_cast<std::size_t>(i)], s0, s1,
               s0 > 0.0 ? s1 / s0 : 0.0);
  }
  bool diverged = false;
  for (const auto& r : study.runs) {
    diverged = diverged || r.diverged;
  }
  return diverged ? kExitDiverged : 0;
}

int cmd_compare(const Common& c) {
  const vtol::ScenarioConfig cfg = load(c, vtol::comparison_scenario());
  const vtol::ComparisonResult cmp = vtol::compare_controllers(cfg);
  fs::create_directories(c.out);
  {
    std::ofstream out(fs::path(c.out) / "comparison.csv", std::ios::binary);
    vtol::write_comparison_csv(out, cmp);
  }
  for (const auto& run : cmp.runs) {
    vtol::write_run(run, fs::path(c.out) / std::string(vtol::scheme_name(run.summary.scheme)));
  }
  fmt::print("{}", vtol::comparison_table(cmp));
  for (const auto& m : cmp.metrics) {
    if (m.diverged) {
      return kExitDiverged;
    }
  }
  return 0;
}

int cmd_sysid(const std::string& dataset, const std::string& generate, std::uint64_t seed, double sigma,
              double rotor_sigma, const std::string& out_dir) {
  const vtol::TunnelModel rig;
  if (!generate.empty()) {
    vtol::Rng rng(seed);
    vtol::TunnelDataset ds = vtol::synth_tunnel_data(rig, vtol::default_aero_grid(), sigma, rng);
    const vtol::TunnelDataset rotor = vtol::synth_tunnel_data(rig, vtol::default_rotor_grid(), rotor_sigma, rng);
    ds.insert(ds.end(), rotor.begin(), rotor.end());
    std::ofstream out(generate, std::ios::binary);
    vtol::write_dataset_csv(out, ds);
    fmt::print("wrote {} rows to {}\n", ds.size(), generate);
    if (dataset.empty()) {
      return 0;
    }
  }

  std::ifstream in(dataset);
  if (!in) {
    throw std::runtime_error("cannot open dataset " + dataset);
  }
  const vtol::TunnelDataset ds = vtol::read_dataset_csv(in);
  const vtol::PosteriorFit aero = vtol::fit_aero_linear(ds, rig.rho, rig.s_ref);
  const vtol::SideForceFit side = vtol::fit_sideforce(ds, rig.rho, rig.prop_speed_max, rig.shape.diameter);

  const vtol::VehicleSpec vehicle;
  const vtol::ParamVector scale =
      vtol::normalisation_scale(vehicle, {side.k1, side.k2, vehicle.lift_prop_diameter}, rig.rho);
  const double cs_bar = side.cs * scale[static_cast<int>(vtol::Param::kSideForce)];

  const char* names[] = {"CL0", "CL1", "CD0", "CD1", "CD2"};
  fmt::print("airframe rows: {}\n", aero.rows_used);
  for (int i = 0; i < 5; ++i) {
    fmt::print("  {:<4} {:>10.5f} +- {:.5f}\n", names[i], aero.mean[i], aero.std[i]);
  }
  fmt::print("rotor rows: {}\n", side.rows_used);
  fmt::print("  CS   {:>10.4e} +- {:.2e}  (mass-normalised {:.4f})\n", side.cs, side.cs_std, cs_bar);
  fmt::print("  k1   {:>10.3f}\n  k2   {:>10.3f}\n", side.k1, side.k2);

  if (!out_dir.empty()) {
    nlohmann::json j;
    for (int i = 0; i < 5; ++i) {
      j["aero"][names[i]] = {{"mean", aero.mean[i]}, {"std", aero.std[i]}};
    }
    j["side_force"] = {{"cs", side.cs}, {"cs_std", side.cs_std}, {"cs_normalised", cs_bar},
                       {"k1", side.k1},  {"k2", side.k2},         {"weighted_sse", side.weighted_sse}};
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "sysid.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite-adaptive VTOL flight simulator"};
  app.require_subcommand(1);

  Common run_opts;
  std::string scheme;
  auto* run = app.add_subcommand("run", "run one scenario and write telemetry");
  add_common(run, run_opts);
  run->add_option("--scheme", scheme, "override the controller: I..V or its name");

  Common study_opts;
  int runs = 7;
  auto* study = app.add_subcommand("study", "parameter convergence over random initial estimates");
  add_common(study, study_opts);
  study->add_option("--runs", runs, "number of runs")->capture_default_str()->check(CLI::Range(2, 1000));

  Common cmp_opts;
  auto* compare = app.add_subcommand("compare", "run all five controllers on the same wind");
  add_common(compare, cmp_opts);

  std::string dataset;
  std::string generate;
  std::uint64_t sysid_seed = 1;
  double sigma = 0.12;
  double rotor_sigma = 0.002;
  std::string sysid_out;
  auto* sysid = app.add_subcommand("sysid", "fit force-model coefficients to a tunnel dataset");
  sysid->add_option("--dataset", dataset, "CSV with header V,alpha,u,Fx,Fy,Fz,sigma");
  sysid->add_option("--generate", generate, "write a synthetic dataset to this path first");
  sysid->add_option("--seed", sysid_seed, "seed for --generate")->capture_default_str();
  sysid->add_option("--sigma", sigma, "airframe force noise for --generate, N")->capture_default_str();
  sysid->add_option("--rotor-sigma", rotor_sigma, "rotor force noise for --generate, N")->capture_default_str();
  sysid->add_option("--out", sysid_out, "directory for sysid.json");

  bool convergence = false;
  auto* defaults = app.add_subcommand("defaults", "print the default scenario as JSON");
  defaults->add_flag("--convergence", convergence, "the convergence-study scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_opts, scheme);
    }
    if (*study) {
      return cmd_study(study_opts, runs);
    }
    if (*compare) {
      return cmd_compare(cmp_opts);
    }
    if (*sysid) {
      if (dataset.empty() && generate.empty()) {
        fmt::print(stderr, "sysid: --dataset or --generate is required\n");
        return 1;
      }
      return cmd_sysid(dataset, generate, sysid_seed, sigma, rotor_sigma, sysid_out);
    }
    if (*defaults) {
      std::cout << vtol::config_to_json(convergence ? vtol::convergence_scenario() : vtol::comparison_scenario());
      return 0;
    }
  } catch (const vtol::ConfigError& e) {
    fmt::print(stderr, "invalid config: {}\n", e.what());
    return kExitBadConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
