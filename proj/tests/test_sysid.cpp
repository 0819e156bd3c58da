#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "vtol/sysid.hpp"

using namespace vtol;

namespace {

TunnelDataset noise_free(const TunnelGrid& grid, double nominal_sigma) {
  Rng rng(1);
  TunnelDataset ds = synth_tunnel_data(TunnelModel{}, grid, 0.0, rng);
  for (auto& r : ds) {
    r.sigma = nominal_sigma;
  }
  return ds;
}

Eigen::VectorXd truth_vector() {
  const TunnelModel m;
  Eigen::VectorXd t(5);
  t << m.cl0, m.cl1, m.cd0, m.cd1, m.cd2;
  return t;
}

}  // namespace

TEST(TunnelData, NoiseFreeRowsMatchModel) {
  const TunnelModel m;
  const TunnelDataset ds = noise_free(default_aero_grid(), 0.1);
  for (const auto& r : ds) {
    EXPECT_EQ(r.force, tunnel_force(m, r.airspeed, r.alpha, r.throttle));
  }
}

TEST(TunnelData, ZeroAirspeedHasNoAeroForce) {
  EXPECT_TRUE(tunnel_force(TunnelModel{}, 0.0, 0.1, 0.0).isZero());
}

TEST(TunnelData, LiftAndDragInNewtons) {
  // V = 9, alpha = 0: lift along -z, drag along -x
  const Vec3 f = tunnel_force(TunnelModel{}, 9.0, 0.0, 0.0);
  EXPECT_NEAR(-f.z(), 4.09905916875, 1e-10);
  EXPECT_NEAR(-f.x(), 1.71596242125, 1e-10);
  EXPECT_EQ(f.y(), 0.0);
}

TEST(TunnelData, DeterministicAndNoiseLevel) {
  Rng a(5);
  Rng b(5);
  const TunnelDataset da = synth_tunnel_data(TunnelModel{}, default_aero_grid(), 0.12, a);
  const TunnelDataset db = synth_tunnel_data(TunnelModel{}, default_aero_grid(), 0.12, b);
  ASSERT_EQ(da.size(), db.size());
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    EXPECT_EQ(da[i].force, db[i].force);
    const Vec3 res = da[i].force - tunnel_force(TunnelModel{}, da[i].airspeed, da[i].alpha, 0.0);
    sq += res.squaredNorm();
    n += 3;
  }
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(n)), 0.12, 0.012);
}

TEST(TunnelData, CsvRoundTrip) {
  Rng rng(2);
  const TunnelDataset ds = synth_tunnel_data(TunnelModel{}, default_rotor_grid(), 0.01, rng);
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  const TunnelDataset back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back[i].force, ds[i].force);
    EXPECT_EQ(back[i].alpha, ds[i].alpha);
    EXPECT_EQ(back[i].throttle, ds[i].throttle);
  }
}

TEST(TunnelData, CsvRejectsBadInput) {
  std::stringstream header("V,alpha,u,Fx,Fy\n");
  EXPECT_THROW(read_dataset_csv(header), SysidError);
  std::stringstream row("V,alpha,u,Fx,Fy,Fz,sigma\n1,2,3,x,5,6,7\n");
  EXPECT_THROW(read_dataset_csv(row), SysidError);
  std::stringstream short_row("V,alpha,u,Fx,Fy,Fz,sigma\n1,2,3\n");
  EXPECT_THROW(read_dataset_csv(short_row), SysidError);
}

TEST(AeroFit, NoiseFreeRecovery) {
  const PosteriorFit fit = fit_aero_linear(noise_free(default_aero_grid(), 1e-3), 1.225, 0.223);
  EXPECT_LT((fit.mean - truth_vector()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE((fit.std.array() > 0.0).all());
}

TEST(AeroFit, DoublingDataShrinksStd) {
  const TunnelDataset ds = noise_free(default_aero_grid(), 0.12);
  TunnelDataset twice = ds;
  twice.insert(twice.end(), ds.begin(), ds.end());
  const PosteriorFit a = fit_aero_linear(ds, 1.225, 0.223);
  const PosteriorFit b = fit_aero_linear(twice, 1.225, 0.223);
  const Eigen::VectorXd ratio = a.std.cwiseQuotient(b.std);
  for (Eigen::Index i = 0; i < ratio.size(); ++i) {
    EXPECT_NEAR(ratio[i], std::sqrt(2.0), 0.01);
  }
}

TEST(AeroFit, StdDecreasesAsRowsAreAdded) {
  const TunnelDataset ds = noise_free(default_aero_grid(), 0.12);
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(5, 1e9);
  for (std::size_t n = 40; n <= ds.size(); n += 20) {
    const TunnelDataset part(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(n));
    const PosteriorFit fit = fit_aero_linear(part, 1.225, 0.223);
    EXPECT_TRUE((fit.std.array() < prev.array()).all());
    prev = fit.std;
  }
}

TEST(AeroFit, RejectsDegenerateData) {
  TunnelGrid g = default_aero_grid();
  g.alphas = {0.05, 0.1};
  EXPECT_THROW(fit_aero_linear(noise_free(g, 0.1), 1.225, 0.223), SysidError);
  g = default_aero_grid();
  g.airspeeds = {5.0};
  g.alphas.resize(5);
  EXPECT_THROW(fit_aero_linear(noise_free(g, 0.1), 1.225, 0.223), SysidError);
}

TEST(SideForceFit, NoiseFreeRecoveryWithinGrid) {
  const TunnelModel m;
  const SideForceFit fit =
      fit_sideforce(noise_free(default_rotor_grid(), 1e-3), m.rho, m.prop_speed_max, m.shape.diameter);
  EXPECT_LE(std::abs(fit.k1 - m.shape.k1), 0.005 + 1e-9);
  EXPECT_LE(std::abs(fit.k2 - m.shape.k2), 0.05 + 1e-9);
  EXPECT_NEAR(fit.cs / m.cs, 1.0, 0.05);
}

TEST(SideForceFit, TiesGoToSmallestK1) {
  // Zero side force fits every cell equally well.
  TunnelDataset ds = noise_free(default_rotor_grid(), 1e-3);
  for (auto& r : ds) {
    r.force.x() = 0.0;
  }
  const SideForceGridSpec spec;
  const SideForceFit fit = fit_sideforce(ds, 1.225, 2500.0, 6.0 * 0.0254, spec);
  EXPECT_EQ(fit.k1, spec.k1_min);
  EXPECT_EQ(fit.k2, spec.k2_min);
  EXPECT_EQ(fit.cs, 0.0);
}

TEST(SideForceFit, CubicPeaksAwayFromZero) {
  const double k2 = 3.126;
  double best_a = 0.0;
  double best = -1.0;
  for (double a = -1.5; a <= 1.5; a += 1e-5) {
    const double g = (std::numbers::pi * std::numbers::pi / 4.0 - a * a) * (a + k2);
    if (g > best) {
      best = g;
      best_a = a;
    }
  }
  EXPECT_NEAR(best_a, 0.3393873582106191, 1e-4);
  const double half_pi = std::numbers::pi / 2.0;
  EXPECT_NEAR((half_pi * half_pi - half_pi * half_pi) * (half_pi + k2), 0.0, 1e-15);
}

TEST(Probe, NoiseFreeGainRecovery) {
  ProbeCal cal;
  cal.noise_pa = 0.0;
  Rng rng(1);
  std::vector<double> angles;
  for (int d = -20; d <= 20; d += 2) {
    angles.push_back(d * std::numbers::pi / 180.0);
  }
  const ProbeFit fit = fit_probe_gain(synth_probe_sweep(angles, 9.0, ProbeAxis::kAlpha, cal, 1, rng));
  EXPECT_NEAR(fit.k, 2.0, 1e-6);
  EXPECT_LT(fit.rms_angle_error, 1e-9);
  EXPECT_LT(fit.linearity, 0.02);
}

TEST(Probe, NoisyGainWithinTwoPercent) {
  ProbeCal cal;
  std::vector<double> angles;
  for (int d = -20; d <= 20; d += 2) {
    angles.push_back(d * std::numbers::pi / 180.0);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const ProbeFit fit = fit_probe_gain(synth_probe_sweep(angles, 9.0, ProbeAxis::kBeta, cal, 50, rng));
    EXPECT_NEAR(fit.k, 2.0, 0.04);
    EXPECT_LT(fit.linearity, 0.02);
  }
}

TEST(Probe, TooFewSamples) {
  ProbeCal cal;
  Rng rng(1);
  EXPECT_THROW(fit_probe_gain(synth_probe_sweep({0.0, 0.1, 0.2}, 9.0, ProbeAxis::kAlpha, cal, 1, rng)),
               SysidError);
}
