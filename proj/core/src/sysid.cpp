#include "vtol/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace vtol {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kMinFitAirspeed = 0.5;

bool is_aero_row(const TunnelRow& r) { return r.throttle == 0.0; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const TunnelDataset& ds) {
  out << "V,alpha,u,Fx,Fy,Fz,sigma\n";
  for (const auto& r : ds) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.airspeed, r.alpha, r.throttle, r.force.x(),
                       r.force.y(), r.force.z(), r.sigma);
  }
}

TunnelDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw SysidError("dataset is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "V,alpha,u,Fx,Fy,Fz,sigma") {
    throw SysidError("unexpected dataset header: " + line);
  }
  TunnelDataset ds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 7) {
      throw SysidError(fmt::format("line {}: expected 7 columns, got {}", line_no, cells.size()));
    }
    double v[7];
    for (int i = 0; i < 7; ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[i].size() || !std::isfinite(v[i])) {
        throw SysidError(fmt::format("line {}: bad number '{}'", line_no, cells[i]));
      }
    }
    ds.push_back({v[0], v[1], v[2], Vec3(v[3], v[4], v[5]), v[6]});
  }
  return ds;
}

TunnelGrid default_aero_grid() {
  TunnelGrid g;
  g.airspeeds = {3.0, 5.0, 7.0, 9.0};
  for (double deg = -10.0; deg <= 20.0 + 1e-9; deg += 2.5) {
    g.alphas.push_back(deg * std::numbers::pi / 180.0);
  }
  g.throttles = {0.0};
  return g;
}

TunnelGrid default_rotor_grid() {
  TunnelGrid g;
  g.airspeeds = {3.0, 5.0, 7.0, 9.0};
  for (double deg = -45.0; deg <= 45.0 + 1e-9; deg += 7.5) {
    g.alphas.push_back(deg * std::numbers::pi / 180.0);
  }
  g.throttles = {0.3, 0.5, 0.7, 0.9};
  return g;
}

Vec3 tunnel_force(const TunnelModel& m, double airspeed, double alpha, double throttle) {
  if (throttle == 0.0) {
    const double qs = 0.5 * m.rho * airspeed * airspeed * m.s_ref;
    const double cl = m.cl0 + m.cl1 * alpha;
    const double cd = m.cd0 + m.cd1 * alpha + m.cd2 * alpha * alpha;
    const double sa = std::sin(alpha);
    const double ca = std::cos(alpha);
    return qs * Vec3(cl * sa - cd * ca, 0.0, -cl * ca - cd * sa);
  }
  const double n = m.prop_speed_max * throttle;
  const double d = m.shape.diameter;
  const double side = m.cs * m.rho * std::pow(n, m.shape.k1) * std::pow(airspeed, 2.0 - m.shape.k1) *
                      std::pow(d, 2.0 + m.shape.k1) * (kHalfPi * kHalfPi - alpha * alpha) *
                      (alpha + m.shape.k2);
  const double thrust = m.ct * m.rho * std::pow(d, 4) * n * n;
  return Vec3(-side, 0.0, -thrust);
}

TunnelDataset synth_tunnel_data(const TunnelModel& truth, const TunnelGrid& grid, double sigma, Rng& rng) {
  if (grid.airspeeds.empty() || grid.alphas.empty() || grid.throttles.empty()) {
    throw SysidError("tunnel grid is empty");
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  TunnelDataset ds;
  ds.reserve(grid.airspeeds.size() * grid.alphas.size() * grid.throttles.size());
  for (double u : grid.throttles) {
    for (double v : grid.airspeeds) {
      for (double a : grid.alphas) {
        TunnelRow row{v, a, u, tunnel_force(truth, v, a, u), sigma};
        if (sigma > 0.0) {
          const double nx = noise(rng);
          const double ny = noise(rng);
          const double nz = noise(rng);
          row.force += sigma * Vec3(nx, ny, nz);
        }
        ds.push_back(row);
      }
    }
  }
  return ds;
}

GaussianPrior weak_aero_prior() {
  return {Eigen::VectorXd::Zero(5), Eigen::VectorXd::Constant(5, 100.0)};
}

PosteriorFit fit_aero_linear(const TunnelDataset& ds, double rho, double s_ref, const GaussianPrior& prior) {
  if (prior.mean.size() != 5 || prior.std.size() != 5 || (prior.std.array() <= 0.0).any()) {
    throw SysidError("aero prior must have 5 entries with positive std");
  }
  std::vector<const TunnelRow*> rows;
  std::set<double> alphas;
  for (const auto& r : ds) {
    if (is_aero_row(r) && r.airspeed > kMinFitAirspeed) {
      if (!(r.sigma > 0.0)) {
        throw SysidError("aero rows need a positive noise sigma");
      }
      rows.push_back(&r);
      alphas.insert(r.alpha);
    }
  }
  if (rows.size() < 20) {
    throw SysidError(fmt::format("need at least 20 airframe rows, got {}", rows.size()));
  }
  if (alphas.size() < 3) {
    throw SysidError("need at least 3 distinct angles of attack");
  }

  // Stacked design: lift rows then drag rows, parameters (CL0, CL1, CD0, CD1, CD2).
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2 * n, 5);
  Eigen::VectorXd y(2 * n);
  Eigen::VectorXd w(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TunnelRow& r = *rows[static_cast<std::size_t>(i)];
    const double qs = 0.5 * rho * r.airspeed * r.airspeed * s_ref;
    const double sa = std::sin(r.alpha);
    const double ca = std::cos(r.alpha);
    const double lift = r.force.x() * sa - r.force.z() * ca;
    const double drag = -r.force.x() * ca - r.force.z() * sa;
    // A rotation of i.i.d. noise stays i.i.d., so both channels keep sigma.
    const double inv_var = (qs * qs) / (r.sigma * r.sigma);
    x.row(i) << 1.0, r.alpha, 0.0, 0.0, 0.0;
    y[i] = lift / qs;
    w[i] = inv_var;
    x.row(n + i) << 0.0, 0.0, 1.0, r.alpha, r.alpha * r.alpha;
    y[n + i] = drag / qs;
    w[n + i] = inv_var;
  }

  const Eigen::MatrixXd xw = w.cwiseSqrt().asDiagonal() * x;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5) {
    throw SysidError("aerodynamic design matrix is rank deficient");
  }

  const Eigen::VectorXd prior_prec = prior.std.array().square().inverse().matrix();
  Eigen::MatrixXd precision = x.transpose() * w.asDiagonal() * x;
  precision.diagonal() += prior_prec;
  const Eigen::VectorXd rhs = x.transpose() * w.asDiagonal() * y + prior_prec.cwiseProduct(prior.mean);

  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw SysidError("posterior precision is not positive definite");
  }
  PosteriorFit fit;
  fit.covariance = llt.solve(Eigen::MatrixXd::Identity(5, 5));
  fit.mean = llt.solve(rhs);
  fit.std = fit.covariance.diagonal().cwiseSqrt();
  fit.rows_used = rows.size();
  return fit;
}

SideForceFit fit_sideforce(const TunnelDataset& ds, double rho, double prop_speed_max, double diameter,
                           const SideForceGridSpec& grid) {
  // Per row: basis = A exp(k1 L) (alpha + k2), with A and L independent of
  // the exponents, so each k1 needs one pass over the data and each k2 is O(1).
  struct Pre {
    double a, l, alpha, y, w;
  };
  std::vector<Pre> pre;
  std::set<double> alphas;
  for (const auto& r : ds) {
    if (is_aero_row(r) || !(r.airspeed > 0.0)) {
      continue;
    }
    if (!(r.sigma > 0.0)) {
      throw SysidError("rotor rows need a positive noise sigma");
    }
    const double n = prop_speed_max * r.throttle;
    pre.push_back({rho * r.airspeed * r.airspeed * diameter * diameter *
                       (kHalfPi * kHalfPi - r.alpha * r.alpha),
                   std::log(n * diameter / r.airspeed), r.alpha, -r.force.x(),
                   1.0 / (r.sigma * r.sigma)});
    alphas.insert(r.alpha);
  }
  if (pre.size() < 3 || alphas.size() < 3) {
    throw SysidError("side-force fit needs rotor rows at 3 or more angles");
  }

  const auto k1_count = static_cast<int>(std::floor((grid.k1_max - grid.k1_min) / grid.k1_step + 1e-9)) + 1;
  const auto k2_count = static_cast<int>(std::floor((grid.k2_max - grid.k2_min) / grid.k2_step + 1e-9)) + 1;

  double syy = 0.0;
  for (const auto& p : pre) {
    syy += p.w * p.y * p.y;
  }

  SideForceFit best;
  best.weighted_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k1_count; ++i) {
    const double k1 = grid.k1_min + i * grid.k1_step;
    double sya = 0.0, syb = 0.0, saa = 0.0, sab = 0.0, sbb = 0.0;
    for (const auto& p : pre) {
      const double b = p.a * std::exp(k1 * p.l);
      const double a = b * p.alpha;
      sya += p.w * p.y * a;
      syb += p.w * p.y * b;
      saa += p.w * a * a;
      sab += p.w * a * b;
      sbb += p.w * b * b;
    }
    for (int j = 0; j < k2_count; ++j) {
      const double k2 = grid.k2_min + j * grid.k2_step;
      const double syg = sya + k2 * syb;
      const double sgg = saa + 2.0 * k2 * sab + k2 * k2 * sbb;
      if (!(sgg > 0.0)) {
        continue;
      }
      const double sse = syy - syg * syg / sgg;
      if (sse < best.weighted_sse) {
        best.weighted_sse = sse;
        best.k1 = k1;
        best.k2 = k2;
        best.cs = syg / sgg;
        best.cs_std = 1.0 / std::sqrt(sgg);
      }
    }
  }
  best.rows_used = pre.size();
  return best;
}

double probe_angle(const ProbeReading& r, ProbeAxis axis, double k) {
  const double q = axis == ProbeAxis::kAlpha ? r.q_alpha : r.q_beta;
  return std::atan(k * q / r.q_inf);
}

std::vector<ProbeSample> synth_probe_sweep(const std::vector<double>& angles, double airspeed,
                                           ProbeAxis axis, const ProbeCal& cal, int samples_per_angle,
                                           Rng& rng) {
  if (samples_per_angle < 1) {
    throw SysidError("samples_per_angle must be at least 1");
  }
  std::vector<ProbeSample> out;
  out.reserve(angles.size());
  for (double angle : angles) {
    const Vec3 vi = axis == ProbeAxis::kAlpha
                        ? Vec3(std::cos(angle), 0.0, std::sin(angle)) * airspeed
                        : Vec3(std::cos(angle), std::sin(angle), 0.0) * airspeed;
    ProbeReading avg;
    for (int s = 0; s < samples_per_angle; ++s) {
      const auto r = probe_forward(vi, cal, rng);
      if (!r) {
        throw SysidError("probe sweep angle puts the probe in reverse flow");
      }
      avg.q_inf += r->q_inf;
      avg.q_alpha += r->q_alpha;
      avg.q_beta += r->q_beta;
    }
    avg.q_inf /= samples_per_angle;
    avg.q_alpha /= samples_per_angle;
    avg.q_beta /= samples_per_angle;
    out.push_back({angle, avg, axis});
  }
  return out;
}

ProbeFit fit_probe_gain(const std::vector<ProbeSample>& sweep) {
  if (sweep.size() < 5) {
    throw SysidError("probe calibration needs at least 5 angles");
  }
  // tan(angle) = k * ratio gives the linear starting point.
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : sweep) {
    const double q = s.axis == ProbeAxis::kAlpha ? s.reading.q_alpha : s.reading.q_beta;
    const double ratio = q / s.reading.q_inf;
    num += ratio * std::tan(s.true_angle);
    den += ratio * ratio;
  }
  if (!(den > 0.0)) {
    throw SysidError("probe sweep has no angular excitation");
  }
  double k = num / den;

  // Gauss-Newton on sum (atan(k r) - angle)^2.
  for (int iter = 0; iter < 50; ++iter) {
    double jtj = 0.0;
    double jtr = 0.0;
    for (const auto& s : sweep) {
      const double q = s.axis == ProbeAxis::kAlpha ? s.reading.q_alpha : s.reading.q_beta;
      const double ratio = q / s.reading.q_inf;
      const double res = std::atan(k * ratio) - s.true_angle;
      const double jac = ratio / (1.0 + k * k * ratio * ratio);
      jtj += jac * jac;
      jtr += jac * res;
    }
    const double delta = jtr / jtj;
    k -= delta;
    if (std::abs(delta) < 1e-14 * std::max(1.0, std::abs(k))) {
      break;
    }
  }

  ProbeFit fit;
  fit.k = k;
  const auto n = static_cast<double>(sweep.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, sse = 0.0, full_scale = 0.0;
  std::vector<double> est(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    est[i] = probe_angle(sweep[i].reading, sweep[i].axis, k);
    const double x = sweep[i].true_angle;
    sx += x;
    sy += est[i];
    sxx += x * x;
    sxy += x * est[i];
    sse += (est[i] - x) * (est[i] - x);
    full_scale = std::max(full_scale, std::abs(x));
  }
  fit.rms_angle_error = std::sqrt(sse / n);
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double worst = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    worst = std::max(worst, std::abs(est[i] - (fit.slope * sweep[i].true_angle + fit.intercept)));
  }
  fit.linearity = full_scale > 0.0 ? worst / full_scale : 0.0;
  return fit;
}

}  // namespace vtol
