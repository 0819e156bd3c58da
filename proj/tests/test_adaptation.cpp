#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "vtol/adaptation.hpp"
#include "vtol/vehicle.hpp"

using namespace vtol;

namespace {

AdaptationGains nominal_gains() {
  const NormalisedFit fit = normalise(RawForceFit{}, VehicleSpec{}, 1.225);
  AdaptationGains g;
  g.p0 = default_initial_gain();
  g.theta0 = fit.mean;
  g.bound = 3.0 * fit.std;
  return g;
}

Regressor random_regressor(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Regressor w;
  for (int i = 0; i < w.size(); ++i) {
    w.data()[i] = n(rng);
  }
  return w;
}

bool inside(const ForceParams& th, const AdaptationGains& g) {
  return ((th.theta - g.theta0.theta).cwiseAbs().array() <= g.bound.array() + 1e-15).all();
}

}  // namespace

TEST(PredictionError, Cases) {
  std::mt19937_64 rng(1);
  const Regressor w = random_regressor(rng);
  ForceParams th;
  th.theta.setLinSpaced(0.1, 0.8);
  EXPECT_LT(prediction_error(w, th, w * th.theta).norm(), 1e-15);
  EXPECT_EQ(prediction_error(Regressor::Zero(), th, Vec3(1, 2, 3)), Vec3(-1, -2, -3));
}

TEST(Update, ZeroDriveLeavesEstimate) {
  AdaptationGains g = nominal_gains();
  g.damping = 0.0;
  AdaptationState st = initial_state(g, g.theta0);
  st.theta_hat.theta += 0.5 * g.bound;
  const ParamVector before = st.theta_hat.theta;
  st = update(st, Regressor::Zero(), Rotation{}, Vec3::Zero(), Vec3::Zero(), g, AdaptationLaw::kComposite, 0.004);
  EXPECT_EQ(st.theta_hat.theta, before);
}

TEST(Update, DampingPullsTowardPrior) {
  const AdaptationGains g = nominal_gains();
  AdaptationState st = initial_state(g, g.theta0);
  const ParamVector offset = 0.5 * g.bound.cwiseProduct((ParamVector() << 1, -1, 1, -1, 1, -1, 1, -1).finished());
  st.theta_hat.theta += offset;
  const AdaptationState next =
      update(st, Regressor::Zero(), Rotation{}, Vec3::Zero(), Vec3::Zero(), g, AdaptationLaw::kComposite, 0.004);
  const ParamVector before = (st.theta_hat.theta - g.theta0.theta).cwiseAbs();
  const ParamVector after = (next.theta_hat.theta - g.theta0.theta).cwiseAbs();
  EXPECT_TRUE((after.array() < before.array()).all());
}

TEST(Update, GainGrowsWithForgetting) {
  AdaptationGains g = nominal_gains();
  g.forgetting = 0.05;
  AdaptationState st = initial_state(g, g.theta0);
  const double dt = 0.004;
  for (int k = 0; k < 250; ++k) {
    st = update(st, Regressor::Zero(), Rotation{}, Vec3::Zero(), Vec3::Zero(), g, AdaptationLaw::kComposite, dt);
  }
  const ParamMatrix expected = ParamMatrix(g.p0.asDiagonal()) * std::exp(0.05);
  for (int i = 0; i < kNumParams; ++i) {
    EXPECT_NEAR(st.P(i, i) / expected(i, i), 1.0, 0.01);
  }
  EXPECT_NEAR(st.P(0, 0) / g.p0[0], 1.051265840734416, 1e-12);
}

TEST(Update, FrozenGainKeepsP0) {
  const AdaptationGains g = nominal_gains();
  std::mt19937_64 rng(3);
  AdaptationState st = initial_state(g, g.theta0);
  st.W = random_regressor(rng);
  for (int k = 0; k < 100; ++k) {
    st = update(st, random_regressor(rng), Rotation{}, Vec3(0.1, 0, 0), Vec3(0, 0.1, 0), g,
                AdaptationLaw::kCompositeFrozenGain, 0.004);
  }
  EXPECT_EQ(st.P, ParamMatrix(g.p0.asDiagonal()));
}

TEST(Update, TrackingOnlyLaw) {
  AdaptationGains g = nominal_gains();
  g.bound.setConstant(1e9);
  std::mt19937_64 rng(8);
  const AdaptationState st = initial_state(g, g.theta0);
  const Regressor phi = random_regressor(rng);
  const Rotation r = Rotation::exp(Vec3(0.1, 0.2, 0.3));
  const Vec3 v_err(0.2, -0.1, 0.05);
  const AdaptationState next =
      update(st, phi, r, v_err, Vec3(5, 5, 5), g, AdaptationLaw::kTrackingOnly, 0.004);
  const ParamVector expected =
      g.theta0.theta + 0.004 * g.p0.cwiseProduct(phi.transpose() * (r.matrix().transpose() * v_err));
  EXPECT_LT((next.theta_hat.theta - expected).norm(), 1e-12 * expected.norm());
}

TEST(Update, GainStaysSymmetricAndBounded) {
  const AdaptationGains g = nominal_gains();
  std::mt19937_64 rng(12);
  AdaptationState st = initial_state(g, g.theta0);
  for (int k = 0; k < 3000; ++k) {
    st.W = 5.0 * random_regressor(rng);
    st = update(st, random_regressor(rng), Rotation{}, Vec3::Zero(), Vec3::Zero(), g, AdaptationLaw::kComposite,
                0.004);
    ASSERT_LT((st.P - st.P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    const Eigen::SelfAdjointEigenSolver<ParamMatrix> eig(st.P);
    ASSERT_GE(eig.eigenvalues().minCoeff(), g.p_min() * (1.0 - 1e-9));
    ASSERT_LE(eig.eigenvalues().maxCoeff(), g.p_max() * (1.0 + 1e-9));
  }
}

TEST(Update, InformationAccumulatesWithoutForgetting) {
  AdaptationGains g = nominal_gains();
  g.forgetting = 0.0;
  g.damping = 0.0;
  std::mt19937_64 rng(5);
  AdaptationState st = initial_state(g, g.theta0);
  double prev = Eigen::SelfAdjointEigenSolver<ParamMatrix>(st.P).eigenvalues().minCoeff();
  for (int k = 0; k < 2000; ++k) {
    st.W = 0.02 * random_regressor(rng);
    st = update(st, Regressor::Zero(), Rotation{}, Vec3::Zero(), Vec3::Zero(), g, AdaptationLaw::kComposite,
                0.004);
    if (k % 50 == 0) {
      const double now = Eigen::SelfAdjointEigenSolver<ParamMatrix>(st.P).eigenvalues().minCoeff();
      EXPECT_LE(now, prev * (1.0 + 1e-9));
      prev = now;
    }
  }
}

TEST(Update, EstimateConvergesUnderExcitation) {
  AdaptationGains g = nominal_gains();
  g.damping = 0.0;
  std::mt19937_64 rng(6);
  ForceParams truth = g.theta0;
  truth.theta += 1.5 * g.bound.cwiseProduct(ParamVector::Constant(0.5));
  AdaptationState st = initial_state(g, g.theta0);
  const ParamMatrix p0 = st.P;
  const ParamMatrix scale = p0.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
  for (int k = 0; k < 50000; ++k) {
    st.W = random_regressor(rng) * scale;
    st.a_m = st.W * truth.theta;
    const Vec3 e = prediction_error(st.W, st.theta_hat, st.a_m);
    st = update(st, Regressor::Zero(), Rotation{}, Vec3::Zero(), e, g, AdaptationLaw::kComposite, 0.004);
  }
  const ParamVector rel = (st.theta_hat.theta - truth.theta).cwiseQuotient(g.bound);
  EXPECT_LT(rel.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Projection, ClampAndIdempotence) {
  const AdaptationGains g = nominal_gains();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    ForceParams th = g.theta0;
    for (int j = 0; j < kNumParams; ++j) {
      th.theta[j] += n(rng) * g.bound[j];
    }
    const ForceParams once = project(th, g);
    EXPECT_TRUE(inside(once, g));
    EXPECT_EQ(project(once, g).theta, once.theta);
  }
}

TEST(Projection, MetricReducesToClampForDiagonalGain) {
  const AdaptationGains g = nominal_gains();
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 3.0);
  const ParamMatrix p = g.p0.asDiagonal();
  for (int i = 0; i < 200; ++i) {
    ForceParams th = g.theta0;
    for (int j = 0; j < kNumParams; ++j) {
      th.theta[j] += n(rng) * g.bound[j];
    }
    EXPECT_LT((project_in_metric(th, p, g).theta - project(th, g).theta).norm(), 1e-12);
  }
}

TEST(Projection, MetricStaysInBoxAndIsIdempotent) {
  const AdaptationGains g = nominal_gains();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Matrix<double, kNumParams, kNumParams> a;
    for (int j = 0; j < a.size(); ++j) {
      a.data()[j] = n(rng);
    }
    const ParamVector d = g.p0.cwiseSqrt();
    const ParamMatrix p = d.asDiagonal() * (a * a.transpose() + ParamMatrix::Identity()) * d.asDiagonal();
    ForceParams th = g.theta0;
    for (int j = 0; j < kNumParams; ++j) {
      th.theta[j] += n(rng) * g.bound[j];
    }
    const ForceParams once = project_in_metric(th, p, g);
    EXPECT_TRUE(inside(once, g));
    EXPECT_LT((project_in_metric(once, p, g).theta - once.theta).norm(), 1e-12 * once.theta.norm());
  }
}

TEST(Projection, MetricShiftsCoupledCoordinate) {
  AdaptationGains g;
  g.p0 = ParamVector::Ones();
  g.bound = ParamVector::Ones();
  ParamMatrix p = ParamMatrix::Identity();
  p(0, 1) = p(1, 0) = 0.5;
  ForceParams th;
  th.theta[0] = 2.0;
  const ForceParams out = project_in_metric(th, p, g);
  EXPECT_DOUBLE_EQ(out.theta[0], 1.0);
  EXPECT_DOUBLE_EQ(out.theta[1], -0.5);
}

TEST(ConditionGain, ClampsEigenvalues) {
  ParamMatrix p = ParamMatrix::Identity();
  p(0, 0) = 1e-9;
  p(1, 1) = 1e9;
  p(2, 3) = 1e-3;
  const ParamMatrix c = condition_gain(p, 1e-3, 1e3);
  EXPECT_EQ(c, c.transpose());
  const Eigen::SelfAdjointEigenSolver<ParamMatrix> eig(c);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1e-3 * (1 - 1e-12));
  EXPECT_LE(eig.eigenvalues().maxCoeff(), 1e3 * (1 + 1e-12));
}

TEST(CompositeAdapter, SettledErrorVanishesWithTruth) {
  const AdaptationGains g = nominal_gains();
  CompositeAdapter ad(g, AdaptationLaw::kComposite, g.theta0, 10.0);
  std::mt19937_64 rng(13);
  const Regressor phi = random_regressor(rng);
  const Vec3 accel = phi * g.theta0.theta;
  Vec3 e;
  for (int k = 0; k < 500; ++k) {
    e = ad.step(phi, accel, Rotation{}, Vec3::Zero(), 0.004);
  }
  EXPECT_LT(e.norm(), 1e-3);
}
