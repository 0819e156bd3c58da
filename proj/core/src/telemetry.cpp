#include "vtol/telemetry.hpp"

#include <iterator>
#include <ostream>

#include <fmt/format.h>

namespace vtol {

std::string telemetry_header() {
  std::string h =
      "t,px,py,pz,vx,vy,vz,verr_x,verr_y,verr_z,qw,qx,qy,qz,wx,wy,wz,alpha,beta,airspeed,u_x,u_z";
  for (auto name : kParamNames) {
    h += ",theta_";
    h += name;
  }
  h += ",e_x,e_y,e_z,lyapunov,zeta_x,zeta_y,zeta_z";
  return h;
}

void write_telemetry_csv(std::ostream& out, const Telemetry& tel, int decimation) {
  const auto step = static_cast<std::size_t>(decimation < 1 ? 1 : decimation);
  out << telemetry_header() << '\n';
  fmt::memory_buffer buf;
  auto put3 = [&](const Vec3& v) { fmt::format_to(std::back_inserter(buf), ",{},{},{}", v.x(), v.y(), v.z()); };
  for (std::size_t i = 0; i < tel.rows.size(); i += step) {
    const TelemetryRow& r = tel.rows[i];
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{}", r.t);
    put3(r.p);
    put3(r.v);
    put3(r.v_err);
    fmt::format_to(std::back_inserter(buf), ",{},{},{},{}", r.q[0], r.q[1], r.q[2], r.q[3]);
    put3(r.omega);
    fmt::format_to(std::back_inserter(buf), ",{},{},{},{},{}", r.alpha, r.beta, r.airspeed, r.u_x, r.u_z);
    for (int k = 0; k < kNumParams; ++k) {
      fmt::format_to(std::back_inserter(buf), ",{}", r.theta_hat[k]);
    }
    put3(r.e);
    fmt::format_to(std::back_inserter(buf), ",{}", r.lyapunov);
    put3(r.zeta);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace vtol
