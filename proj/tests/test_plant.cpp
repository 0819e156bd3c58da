#include <cmath>

#include <gtest/gtest.h>

#include "vtol/plant.hpp"
#include "vtol/vehicle.hpp"

using namespace vtol;

namespace {

PlantTruth nominal_truth() {
  PlantTruth t;
  const NormalisedFit fit = normalise(RawForceFit{}, VehicleSpec{}, 1.225);
  t.theta = fit.mean;
  t.model = default_force_model();
  t.model.shape = fit.shape;
  return t;
}

WindSchedule steady(double throttle, double lag = 0.0) {
  WindSchedule w;
  w.steps = {{0.0, throttle}};
  w.lag_time_constant = lag;
  return w;
}

double state_distance(const RigidBodyState& a, const RigidBodyState& b) {
  return (a.p - b.p).norm() + (a.v - b.v).norm() + (a.omega - b.omega).norm() +
         (a.R.transpose() * b.R).log().norm();
}

RigidBodyState integrate(RigidBodyState s, const ActuatorCommand& cmd, const WindSchedule& w,
                         const PlantTruth& truth, double dt, double duration) {
  const auto n = static_cast<int>(std::llround(duration / dt));
  for (int k = 0; k < n; ++k) {
    s = step(s, cmd, w, k * dt, dt, truth);
  }
  return s;
}

}  // namespace

TEST(Wind, ThrottleMapping) {
  EXPECT_TRUE(wind_at(3.0, steady(0.0)).isZero());
  EXPECT_NEAR(wind_at(3.0, steady(0.3)).norm(), 3.87, 1e-12);
  EXPECT_NEAR(wind_at(3.0, steady(0.7)).norm(), 9.03, 1e-12);
  EXPECT_LT((wind_at(3.0, steady(0.7)).normalized() - Vec3(-1, 0, 0)).norm(), 1e-15);
}

TEST(Wind, LagApproachesTarget) {
  WindSchedule w;
  w.steps = {{0.0, 0.0}, {1.0, 0.5}};
  w.lag_time_constant = 0.5;
  EXPECT_TRUE(wind_at(0.999, w).isZero());
  EXPECT_NEAR(wind_at(1.5, w).norm(), 0.5 * 12.9 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(wind_at(20.0, w).norm(), 0.5 * 12.9, 1e-9);
}

TEST(Wind, ValidateRejectsBadSchedules) {
  WindSchedule w;
  w.steps = {{0.0, 0.2}, {0.0, 0.3}};
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w.steps = {{0.0, 1.2}};
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w.steps = {{0.0, 0.2}};
  w.direction = Vec3(1, 1, 0);
  EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(TrueBodyForce, HoverEquilibrium) {
  const PlantTruth truth = nominal_truth();
  ActuatorCommand cmd;
  cmd.u_z = std::sqrt(9.81 / truth.theta[Param::kThrustZ]);
  const RigidBodyState s;
  const Vec3 f = true_body_force(s, cmd, Vec3::Zero(), truth);
  EXPECT_LT((f - Vec3(0, 0, -9.81)).norm(), 1e-12);
  EXPECT_LT((s.R * f + kGravity).norm(), 1e-12);
}

TEST(TrueBodyForce, ZeroEverything) {
  EXPECT_TRUE(true_body_force(RigidBodyState{}, ActuatorCommand{}, Vec3::Zero(), nominal_truth()).isZero());
}

TEST(TrueBodyForce, EqualsModelPrediction) {
  const PlantTruth truth = nominal_truth();
  RigidBodyState s;
  s.v = Vec3(9, 0, 0);
  const Vec3 f = true_body_force(s, ActuatorCommand{}, Vec3::Zero(), truth);
  const Vec3 expected =
      predict_forces(regressor(airflow_angles(Vec3(9, 0, 0), truth.model), 0, 0, truth.model), truth.theta).total;
  EXPECT_EQ(f, expected);
}

TEST(TrueBodyForce, DisturbanceIsBounded) {
  PlantTruth truth = nominal_truth();
  truth.disturbance.amplitude = 0.4;
  RigidBodyState s;
  s.v = Vec3(50, -30, 10);
  const Vec3 d = truth.disturbance(s);
  EXPECT_LE(d.cwiseAbs().maxCoeff(), 0.4);
}

TEST(Step, FreeFall) {
  PlantTruth truth;  // all coefficients zero
  const RigidBodyState s = integrate(RigidBodyState{}, ActuatorCommand{}, steady(0.0), truth, 0.004, 1.0);
  EXPECT_LT((s.v - Vec3(0, 0, 9.81)).norm(), 1e-10);
  EXPECT_LT((s.p - Vec3(0, 0, 0.5 * 9.81)).norm(), 1e-10);
}

TEST(Step, TorqueFreeSymmetricSpin) {
  PlantTruth truth;
  truth.inertia = Vec3(0.05, 0.05, 0.08).asDiagonal();
  RigidBodyState s;
  s.omega = Vec3(0, 0, 2.5);
  s = integrate(s, ActuatorCommand{}, steady(0.0), truth, 0.004, 2.0);
  EXPECT_LT((s.omega - Vec3(0, 0, 2.5)).norm(), 1e-12);
}

TEST(Step, FourthOrderConvergence) {
  const PlantTruth truth = nominal_truth();
  RigidBodyState s0;
  s0.v = Vec3(6, 0.5, 1.0);
  s0.omega = Vec3(0.8, -0.5, 1.2);
  ActuatorCommand cmd{0.5, 0.55, Vec3(0.02, -0.01, 0.015)};
  const WindSchedule w = steady(0.3);

  const RigidBodyState ref = integrate(s0, cmd, w, truth, 0.01 / 8, 1.0);
  const double e1 = state_distance(integrate(s0, cmd, w, truth, 0.01, 1.0), ref);
  const double e2 = state_distance(integrate(s0, cmd, w, truth, 0.005, 1.0), ref);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 24.0);
}

TEST(Step, KeepsRotationOrthonormal) {
  PlantTruth truth;
  RigidBodyState s;
  s.omega = Vec3(3.0, -2.0, 5.0);
  s = integrate(s, ActuatorCommand{}, steady(0.0), truth, 0.004, 9.0);
  EXPECT_LT(s.R.orthonormality_error(), 1e-8);
}

TEST(Step, RejectsBadStep) {
  EXPECT_THROW(step(RigidBodyState{}, ActuatorCommand{}, steady(0), 0, 0.0, PlantTruth{}), std::invalid_argument);
  EXPECT_THROW(step(RigidBodyState{}, ActuatorCommand{}, steady(0), 0, 0.02, PlantTruth{}), std::invalid_argument);
}

TEST(Step, DivergenceIsReported) {
  RigidBodyState s;
  s.v = Vec3(0, 0, 99.99);
  EXPECT_THROW(step(s, ActuatorCommand{}, steady(0), 0, 0.01, PlantTruth{}), DivergedError);
  s.v = Vec3(std::nan(""), 0, 0);
  EXPECT_THROW(step(s, ActuatorCommand{}, steady(0), 0, 0.01, PlantTruth{}), DivergedError);
}

TEST(Saturate, ClampsThrottleAndTorque) {
  const ActuatorCommand c = saturate({1.4, -0.2, Vec3(3, -5, 0.5)}, 2.0);
  EXPECT_EQ(c.u_x, 1.0);
  EXPECT_EQ(c.u_z, 0.0);
  EXPECT_EQ(c.torque, Vec3(2, -2, 0.5));
}

TEST(ThrottleLag, ZeroTimeConstantPassesThrough) {
  ThrottleLag lag;
  const ActuatorCommand c{0.3, 0.6, Vec3::Zero()};
  EXPECT_EQ(lag.apply(c, 0.004).u_z, 0.6);
}

TEST(ThrottleLag, FirstOrderResponse) {
  ThrottleLag lag(0.1);
  lag.reset({0.0, 0.0, Vec3::Zero()});
  ActuatorCommand out;
  for (int k = 0; k < 25; ++k) {
    out = lag.apply({1.0, 1.0, Vec3::Zero()}, 0.004);
  }
  EXPECT_NEAR(out.u_x, 1.0 - std::exp(-1.0), 1e-12);
}

TEST(Step, BallisticEnergyConserved) {
  PlantTruth truth;
  RigidBodyState s;
  s.v = Vec3(3.0, -1.0, -8.0);
  auto energy = [](const RigidBodyState& x) { return 0.5 * x.v.squaredNorm() - kGravity.dot(x.p); };
  const double e0 = energy(s);
  s = integrate(s, ActuatorCommand{}, steady(0.0), truth, 0.004, 5.0);
  EXPECT_NEAR(energy(s), e0, 1e-9 * std::abs(e0) + 1e-9);
}
