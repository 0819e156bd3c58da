#include "vtol/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace vtol {

namespace {

template <typename F>
void for_window(const Telemetry& tel, double t0, double t1, F&& f) {
  for (const auto& r : tel.rows) {
    if (r.t >= t0 && r.t < t1) {
      f(r);
    }
  }
}

}  // namespace

std::vector<Plateau> plateaus(const WindSchedule& wind, double duration) {
  std::vector<Plateau> out;
  const auto& s = wind.steps;
  if (s.empty() || s.front().start > 0.0) {
    out.push_back({0.0, s.empty() ? duration : std::min(s.front().start, duration), 0.0});
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double start = s[i].start;
    const double end = i + 1 < s.size() ? s[i + 1].start : duration;
    if (start >= duration) {
      break;
    }
    out.push_back({start, std::min(end, duration), s[i].throttle});
  }
  return out;
}

double rms_verr(const Telemetry& tel, double t0, double t1) {
  double sum = 0.0;
  std::size_t n = 0;
  for_window(tel, t0, t1, [&](const TelemetryRow& r) {
    sum += r.v_err.squaredNorm();
    ++n;
  });
  return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

double max_verr(const Telemetry& tel, double t0, double t1) {
  double m = 0.0;
  for_window(tel, t0, t1, [&](const TelemetryRow& r) { m = std::max(m, r.v_err.norm()); });
  return m;
}

double mean_pred_err(const Telemetry& tel, double t0, double t1) {
  double sum = 0.0;
  std::size_t n = 0;
  for_window(tel, t0, t1, [&](const TelemetryRow& r) {
    sum += r.e.norm();
    ++n;
  });
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::vector<PlateauStats> plateau_stats(const Telemetry& tel, const WindSchedule& wind, double duration,
                                        double settle, double factor) {
  std::vector<PlateauStats> out;
  for (const Plateau& p : plateaus(wind, duration)) {
    if (p.end - p.start <= settle) {
      continue;
    }
    PlateauStats st;
    st.plateau = p;
    const double split = p.start + settle;
    st.mean_pred_err = mean_pred_err(tel, split, p.end);
    st.rms_verr = rms_verr(tel, split, p.end);
    for_window(tel, p.start, split, [&](const TelemetryRow& r) { st.envelope = std::max(st.envelope, r.lyapunov); });
    for_window(tel, split, p.end, [&](const TelemetryRow& r) { st.max_after = std::max(st.max_after, r.lyapunov); });
    st.trapped = st.max_after <= factor * st.envelope;
    out.push_back(st);
  }
  return out;
}

DecayFit fit_decay(const Telemetry& tel, double step_time, double window, double floor_fraction) {
  DecayFit fit;
  fit.step_time = step_time;
  const auto& rows = tel.rows;
  std::size_t peak_idx = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].t < step_time || rows[i].t >= step_time + window) {
      continue;
    }
    const double n = rows[i].v_err.norm();
    if (peak_idx == rows.size() || n > fit.peak) {
      fit.peak = n;
      peak_idx = i;
    }
  }
  if (peak_idx == rows.size() || !(fit.peak > 0.0)) {
    return fit;
  }
  fit.peak_time = rows[peak_idx].t;

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t n = 0;
  for (std::size_t i = peak_idx; i < rows.size() && rows[i].t < step_time + window; ++i) {
    const double e = rows[i].v_err.norm();
    if (e < floor_fraction * fit.peak) {
      break;
    }
    const double t = rows[i].t - fit.peak_time;
    const double y = std::log(e);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++n;
  }
  fit.samples = n;
  const double den = static_cast<double>(n) * stt - st * st;
  if (n >= 3 && den > 0.0) {
    fit.rate = -(static_cast<double>(n) * sty - st * sy) / den;
    fit.fitted = true;
  }
  return fit;
}

}  // namespace vtol
