#include <benchmark/benchmark.h>

#include "vtol/allocation.hpp"
#include "vtol/runner.hpp"

using namespace vtol;

namespace {

struct ModelFixture {
  NormalisedFit fit = normalise(RawForceFit{}, VehicleSpec{}, 1.225);
  ForceModelConfig model = [this] {
    ForceModelConfig m = default_force_model();
    m.shape = fit.shape;
    return m;
  }();
};

void BM_Regressor(benchmark::State& state) {
  const ModelFixture fx;
  const AirflowState flow = airflow_angles(Vec3(8.5, 0.4, 1.1), fx.model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(regressor(flow, 0.4, 0.6, fx.model) * fx.fit.mean.theta);
  }
}
BENCHMARK(BM_Regressor);

void BM_Allocate(benchmark::State& state) {
  const ModelFixture fx;
  const AirflowState flow = airflow_angles(Vec3(8.5, 0.4, 1.1), fx.model);
  const Rotation r = Rotation::exp(Vec3(0.02, 0.1, -0.03));
  for (auto _ : state) {
    benchmark::DoNotOptimize(allocate(Vec3(-1.0, 0.2, -9.6), r, flow, fx.fit.mean, fx.model, AllocationConfig{}));
  }
}
BENCHMARK(BM_Allocate);

void BM_PlantStep(benchmark::State& state) {
  const ModelFixture fx;
  PlantTruth truth;
  truth.theta = fx.fit.mean;
  truth.model = fx.model;
  WindSchedule wind;
  wind.steps = {{0.0, 0.5}};
  RigidBodyState s;
  s.v = Vec3(1.0, 0.0, 0.0);
  s.omega = Vec3(0.1, -0.2, 0.05);
  const ActuatorCommand cmd{0.3, 0.6, Vec3(0.01, 0.0, -0.01)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(s, cmd, wind, 1.0, 0.004, truth));
  }
}
BENCHMARK(BM_PlantStep);

void BM_AdaptationUpdate(benchmark::State& state) {
  const ModelFixture fx;
  AdaptationGains g;
  g.p0 = default_initial_gain();
  g.theta0 = fx.fit.mean;
  g.bound = 3.0 * fx.fit.std;
  AdaptationState st = initial_state(g, g.theta0);
  const Regressor phi = regressor(airflow_angles(Vec3(8.5, 0.4, 1.1), fx.model), 0.4, 0.6, fx.model);
  st.W = phi;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        update(st, phi, Rotation{}, Vec3(0.05, 0.0, -0.02), Vec3(0.1, 0.0, 0.05), g, AdaptationLaw::kComposite, 0.004));
  }
}
BENCHMARK(BM_AdaptationUpdate);

void BM_ClosedLoopRun(benchmark::State& state) {
  ScenarioConfig cfg = comparison_scenario();
  cfg.duration = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg).summary.rms_verr);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.duration / cfg.dt));
}
BENCHMARK(BM_ClosedLoopRun)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
