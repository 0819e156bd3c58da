#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "reference_model.hpp"
#include "vtol/forcemodel.hpp"
#include "vtol/vehicle.hpp"

using namespace vtol;

namespace {

ForceParams table_means() {
  return normalise(RawForceFit{}, VehicleSpec{}, 1.225).mean;
}

}  // namespace

TEST(IncidentVelocity, Cases) {
  const Rotation r = Rotation::exp(Vec3(0.3, 0.2, 0.1));
  EXPECT_LT(incident_velocity(Vec3(1, 2, 3), Vec3(1, 2, 3), r).norm(), 1e-15);
  EXPECT_TRUE(incident_velocity(Vec3(9, 0, 0), Vec3::Zero(), Rotation()).isApprox(Vec3(9, 0, 0)));
  const Rotation yaw90 = Rotation::about_axis(Vec3::UnitZ(), std::numbers::pi / 2);
  EXPECT_LT((incident_velocity(Vec3::Zero(), Vec3(-4, 0, 0), yaw90) - Vec3(0, -4, 0)).norm(), 1e-12);
}

TEST(AirflowAngles, Cases) {
  const auto a = airflow_angles(Vec3(5, 0, 0));
  EXPECT_DOUBLE_EQ(a.airspeed, 5.0);
  EXPECT_DOUBLE_EQ(a.alpha, 0.0);
  EXPECT_DOUBLE_EQ(a.beta, 0.0);

  const auto b = airflow_angles(Vec3(1, 0, 1));
  EXPECT_NEAR(b.airspeed, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b.alpha, std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(b.beta, 0.0, 1e-15);

  const auto c = airflow_angles(Vec3(4, 3, 0));
  EXPECT_NEAR(c.airspeed, 5.0, 1e-15);
  EXPECT_NEAR(c.alpha, 0.0, 1e-15);
  EXPECT_NEAR(c.beta, 0.6435011087932844, 1e-12);
}

TEST(AirflowAngles, LowSpeedZeroesAngles) {
  const auto a = airflow_angles(Vec3(0.1, 0.2, -0.3));
  EXPECT_GT(a.airspeed, 0.0);
  EXPECT_EQ(a.alpha, 0.0);
  EXPECT_EQ(a.beta, 0.0);
  EXPECT_EQ(a.beta_bar, 0.0);
}

TEST(AirflowAngles, SideForceAngleVariants) {
  ForceModelConfig cfg;
  const Vec3 v(6, 1, 2);
  EXPECT_NEAR(airflow_angles(v, cfg).beta_bar, std::atan2(1.0, 2.0), 1e-15);
  cfg.side_angle = SideForceAngle::kYOverX;
  EXPECT_NEAR(airflow_angles(v, cfg).beta_bar, std::atan2(1.0, 6.0), 1e-15);
}

TEST(SideForceBasis, Zeros) {
  const SideForceShape shape;
  EXPECT_NEAR(sideforce_basis(std::numbers::pi / 2, 7.0, 0.6, shape), 0.0, 1e-15);
  EXPECT_NEAR(sideforce_basis(-std::numbers::pi / 2, 7.0, 0.6, shape), 0.0, 1e-15);
  EXPECT_EQ(sideforce_basis(0.2, 7.0, 0.0, shape), 0.0);
}

TEST(SideForceBasis, OracleValue) {
  // Independent oracle script value.
  EXPECT_NEAR(sideforce_basis(0.0, 9.0, 0.5, SideForceShape{}), 0.016168656656534545, 1e-15);
}

TEST(SideForceBasis, MaximumAwayFromZero) {
  // Stationary point of ((pi/2)^2 - a^2)(a + k2), from the oracle script.
  const double a_star = 0.3393873582106191;
  const SideForceShape shape;
  const double peak = sideforce_basis(a_star, 9.0, 0.5, shape);
  EXPECT_GT(peak, sideforce_basis(0.0, 9.0, 0.5, shape));
  EXPECT_GT(peak, sideforce_basis(a_star - 0.01, 9.0, 0.5, shape));
  EXPECT_GT(peak, sideforce_basis(a_star + 0.01, 9.0, 0.5, shape));
}

TEST(AeroCoefficients, TableValues) {
  const ForceParams p = table_means();
  const auto c0 = aero_coefficients(0.0, p);
  EXPECT_DOUBLE_EQ(c0.lift, 0.3705);
  EXPECT_DOUBLE_EQ(c0.drag, 0.1551);
  const auto c1 = aero_coefficients(0.1, p);
  EXPECT_NEAR(c1.lift, 0.69552, 1e-12);
  EXPECT_NEAR(c1.drag, 0.18892, 1e-12);
  const auto z = aero_coefficients(0.3, ForceParams{});
  EXPECT_EQ(z.lift, 0.0);
  EXPECT_EQ(z.drag, 0.0);
}

TEST(Regressor, ZeroAtRest) {
  EXPECT_TRUE(regressor(airflow_angles(Vec3::Zero()), 0.0, 0.0, ForceModelConfig{}).isZero());
}

TEST(Regressor, Linearity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ForceModelConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const Vec3 vi(8.0 * u(rng) + 9.0, 2.0 * u(rng), 2.0 * u(rng));
    const Regressor phi = regressor(airflow_angles(vi, cfg), 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng), cfg);
    const ParamVector t1 = ParamVector::Random();
    const ParamVector t2 = ParamVector::Random();
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_LT((phi * (a * t1 + b * t2) - (a * phi * t1 + b * phi * t2)).norm(), 1e-12);
  }
}

TEST(Regressor, ForwardFlowMatchesDirectEvaluation) {
  const ForceParams p = table_means();
  const ForceModelConfig cfg = default_force_model();
  const Vec3 f = regressor(airflow_angles(Vec3(9, 0, 0), cfg), 0.6, 0.0, cfg) * p.theta;
  const double q = 0.5 * 1.225 * 0.223 * 81.0 / 1.70;
  EXPECT_EQ(f.y(), 0.0);
  EXPECT_NEAR(f.x(), p[Param::kThrustX] * 0.36 - q * 0.1551, 1e-12);
  EXPECT_NEAR(f.z(), -q * 0.3705, 1e-12);
}

TEST(Regressor, RandomInputsMatchReference) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ForceModelConfig cfg = default_force_model();
  for (int i = 0; i < 2000; ++i) {
    Vec3 vi(12.0 * u(rng), 6.0 * u(rng), 6.0 * u(rng));
    if (vi.norm() <= 0.6) {
      continue;
    }
    ParamVector th = table_means().theta;
    th = th.cwiseProduct(ParamVector::Ones() + 0.3 * ParamVector::Random());
    const double ux = unit(rng);
    const double uz = unit(rng);
    const Vec3 f = predict_forces(regressor(airflow_angles(vi, cfg), ux, uz, cfg), ForceParams{th}).total;
    const Vec3 ref = oracle::reference_force(vi, ux, uz, th);
    EXPECT_LT((f - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
  }
}

TEST(PredictForces, SplitsThrustAndAero) {
  const ForceParams p = table_means();
  const ForceModelConfig cfg = default_force_model();
  const Regressor phi = regressor(airflow_angles(Vec3(7, 0.5, 1), cfg), 0.4, 0.7, cfg);
  const ForcePrediction f = predict_forces(phi, p);
  EXPECT_LT((f.total - phi * p.theta).norm(), 1e-12);
  EXPECT_LT((f.thrust - thrust_columns(phi) * p.theta).norm(), 1e-12);
  EXPECT_LT((f.aero - aero_columns(phi) * p.theta).norm(), 1e-12);
  EXPECT_TRUE(predict_forces(phi, ForceParams{}).total.isZero());
}

TEST(PredictForces, SquareLawOnPusher) {
  const ForceParams p = table_means();
  const ForceModelConfig cfg = default_force_model();
  const auto flow = airflow_angles(Vec3::Zero(), cfg);
  const double x1 = predict_forces(regressor(flow, 0.2, 0.0, cfg), p).thrust.x();
  const double x2 = predict_forces(regressor(flow, 0.4, 0.0, cfg), p).thrust.x();
  EXPECT_NEAR(x2, 4.0 * x1, 1e-12);
}

TEST(PredictForces, LiftAndDragInNewtons) {
  const ForceParams p = table_means();
  const ForceModelConfig cfg = default_force_model();
  const Vec3 fa = predict_forces(regressor(airflow_angles(Vec3(9, 0, 0), cfg), 0.0, 0.0, cfg), p).aero;
  // Oracle script: L = 4.09905916875 N, D = 1.71596242125 N.
  EXPECT_NEAR(-fa.z() * 1.70, 4.09905916875, 1e-9);
  EXPECT_NEAR(-fa.x() * 1.70, 1.71596242125, 1e-9);
}

TEST(Normalisation, HoverThrottleIsPlausible) {
  const NormalisedFit fit = normalise(RawForceFit{}, VehicleSpec{}, 1.225);
  const double u_hover = std::sqrt(9.81 / fit.mean[Param::kThrustZ]);
  EXPECT_GT(u_hover, 0.4);
  EXPECT_LT(u_hover, 0.8);
  EXPECT_TRUE((fit.std.array() > 0.0).all());
  // Aerodynamic entries are unscaled.
  EXPECT_DOUBLE_EQ(fit.mean[Param::kLift1], 3.2502);
  EXPECT_DOUBLE_EQ(fit.std[static_cast<int>(Param::kDrag2)], 0.1082);
}

TEST(Regressor, RotorSideForceAddsDragInForwardFlight) {
  const ForceModelConfig cfg = default_force_model();
  for (double v : {3.0, 6.0, 9.0}) {
    const Regressor phi = regressor(airflow_angles(Vec3(v, 0, 0.3), cfg), 0.0, 0.6, cfg);
    EXPECT_LT(phi(0, static_cast<int>(Param::kSideForce)), 0.0) << v;
    EXPECT_NEAR(phi(1, static_cast<int>(Param::kSideForce)), 0.0, 1e-15);
  }
}
