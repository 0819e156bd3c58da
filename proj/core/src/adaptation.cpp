#include "vtol/adaptation.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include <Eigen/Dense>

namespace vtol {

AdaptationState initial_state(const AdaptationGains& gains, const ForceParams& theta_init) {
  AdaptationState st;
  st.theta_hat = project(theta_init, gains);
  st.P = gains.p0.asDiagonal();
  return st;
}

Vec3 prediction_error(const Regressor& w, const ForceParams& theta_hat, const Vec3& a_m) {
  return w * theta_hat.theta - a_m;
}

ForceParams project(const ForceParams& theta, const AdaptationGains& gains) {
  ForceParams out;
  out.theta = theta.theta.cwiseMax(gains.theta0.theta - gains.bound)
                  .cwiseMin(gains.theta0.theta + gains.bound);
  return out;
}

ForceParams project_in_metric(const ForceParams& theta, const ParamMatrix& p, const AdaptationGains& gains) {
  const ParamVector lo = gains.theta0.theta - gains.bound;
  const ParamVector hi = gains.theta0.theta + gains.bound;
  std::array<bool, kNumParams> active{};
  ForceParams out = theta;
  for (int pass = 0; pass < kNumParams; ++pass) {
    bool grew = false;
    for (int i = 0; i < kNumParams; ++i) {
      if (!active[static_cast<std::size_t>(i)] && (out.theta[i] < lo[i] || out.theta[i] > hi[i])) {
        active[static_cast<std::size_t>(i)] = true;
        grew = true;
      }
    }
    if (!grew) {
      break;
    }
    std::vector<int> a;
    std::vector<int> f;
    for (int i = 0; i < kNumParams; ++i) {
      (active[static_cast<std::size_t>(i)] ? a : f).push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(a.size());
    const auto nf = static_cast<Eigen::Index>(f.size());
    Eigen::MatrixXd p_aa(na, na);
    Eigen::MatrixXd p_fa(nf, na);
    Eigen::VectorXd shift(na);
    for (Eigen::Index r = 0; r < na; ++r) {
      const int ia = a[static_cast<std::size_t>(r)];
      shift[r] = std::clamp(theta.theta[ia], lo[ia], hi[ia]) - theta.theta[ia];
      for (Eigen::Index c = 0; c < na; ++c) {
        p_aa(r, c) = p(ia, a[static_cast<std::size_t>(c)]);
      }
      for (Eigen::Index c = 0; c < nf; ++c) {
        p_fa(c, r) = p(f[static_cast<std::size_t>(c)], ia);
      }
    }
    const Eigen::VectorXd df = p_fa * p_aa.ldlt().solve(shift);
    out = theta;
    for (Eigen::Index r = 0; r < na; ++r) {
      out.theta[a[static_cast<std::size_t>(r)]] += shift[r];
    }
    for (Eigen::Index c = 0; c < nf; ++c) {
      out.theta[f[static_cast<std::size_t>(c)]] += df[c];
    }
  }
  return project(out, gains);
}

ParamMatrix condition_gain(const ParamMatrix& p, double p_min, double p_max) {
  const ParamMatrix sym = 0.5 * (p + p.transpose());
  const Eigen::SelfAdjointEigenSolver<ParamMatrix> eig(sym);
  const ParamVector values = eig.eigenvalues();
  if (values.minCoeff() >= p_min && values.maxCoeff() <= p_max) {
    return sym;
  }
  const ParamVector clamped = values.cwiseMax(p_min).cwiseMin(p_max);
  const ParamMatrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

AdaptationState update(const AdaptationState& st, const Regressor& phi, const Rotation& r,
                       const Vec3& v_err, const Vec3& e, const AdaptationGains& gains,
                       AdaptationLaw law, double dt) {
  AdaptationState next = st;
  if (law == AdaptationLaw::kNone) {
    return next;
  }
  const ParamVector tracking = phi.transpose() * (r.matrix().transpose() * v_err);

  if (law == AdaptationLaw::kTrackingOnly) {
    const ParamMatrix p0 = gains.p0.asDiagonal();
    next.theta_hat.theta += dt * (p0 * tracking);
    next.theta_hat = project(next.theta_hat, gains);
    return next;
  }

  const ParamVector drive =
      tracking - st.W.transpose() * e - gains.damping * (st.theta_hat.theta - gains.theta0.theta);
  next.theta_hat.theta += dt * (st.P * drive);
  next.theta_hat = project_in_metric(next.theta_hat, st.P, gains);

  if (law == AdaptationLaw::kComposite) {
    const ParamMatrix p_dot =
        -st.P * st.W.transpose() * st.W * st.P + gains.forgetting * st.P;
    next.P = condition_gain(st.P + dt * p_dot, gains.p_min(), gains.p_max());
  }
  return next;
}

CompositeAdapter::CompositeAdapter(AdaptationGains gains, AdaptationLaw law,
                                   const ForceParams& theta_init, double filter_cutoff_hz)
    : gains_(std::move(gains)),
      law_(law),
      state_(initial_state(gains_, theta_init)),
      w_filter_(filter_cutoff_hz, Regressor::Zero()),
      a_filter_(filter_cutoff_hz, Vec3::Zero()) {}

Vec3 CompositeAdapter::step(const Regressor& phi, const Vec3& accel, const Rotation& r,
                            const Vec3& v_err, double dt) {
  state_.W = w_filter_.update(phi, dt);
  state_.a_m = a_filter_.update(accel, dt);
  const Vec3 e = prediction_error(state_.W, state_.theta_hat, state_.a_m);
  state_ = update(state_, phi, r, v_err, e, gains_, law_, dt);
  return e;
}

}  // namespace vtol
