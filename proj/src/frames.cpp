#include "gyrocompass/frames.hpp"

#include <cmath>

#include "gyrocompass/error.hpp"

namespace gyro {

namespace {

bool finite3(double a, double b, double c) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

}  // namespace

double Dcm::orthonormality_error() const {
  double worst = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      // (T^T T)[r][c] = column r dot column c.
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += at(k, r) * at(k, c);
      const double target = (r == c) ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(acc - target));
    }
  }
  return worst;
}

double Dcm::determinant() const {
  return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
         at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
         at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

double wrap_deg(double angle_deg) {
  double r = std::fmod(angle_deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;  // fmod can round back up to the modulus
  return r;
}

double wrap_signed_deg(double angle_deg) {
  double r = std::remainder(angle_deg, 360.0);
  if (r >= 180.0) r = -180.0;  // remainder() may return the +180 boundary
  return r;
}

Dcm dcm_from_euler(const EulerAngles& e) {
  if (!finite3(e.roll, e.pitch, e.yaw)) throw invalid_input("dcm_from_euler: non-finite angle");
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  Dcm t;
  t.at(0, 0) = cy * cp;
  t.at(0, 1) = cy * sp * sr - sy * cr;
  t.at(0, 2) = cy * sp * cr + sy * sr;
  t.at(1, 0) = sy * cp;
  t.at(1, 1) = sy * sp * sr + cy * cr;
  t.at(1, 2) = sy * sp * cr - cy * sr;
  t.at(2, 0) = -sp;
  t.at(2, 1) = cp * sr;
  t.at(2, 2) = cp * cr;
  return t;
}

EulerAngles euler_from_dcm(const Dcm& t) {
  const double t31 = t.at(2, 0);
  if (std::fabs(t31) > 1.0 - 1e-9)
    throw degenerate("euler_from_dcm: gimbal lock, |T31| too close to 1");
  EulerAngles e;
  e.roll = std::atan2(t.at(2, 1), t.at(2, 2));
  if (e.roll >= kPi) e.roll = -kPi;  // keep roll in [-pi, pi)
  e.pitch = std::asin(-t31);
  e.yaw = std::atan2(t.at(1, 0), t.at(0, 0));
  if (e.yaw < 0.0) e.yaw += 2.0 * kPi;
  if (e.yaw >= 2.0 * kPi) e.yaw = 0.0;
  return e;
}

Vec3 gravity_body(const EulerAngles& e, const EarthConstants& c) {
  if (!finite3(e.roll, e.pitch, e.yaw)) throw invalid_input("gravity_body: non-finite angle");
  if (!c.valid()) throw invalid_input("gravity_body: non-positive earth constants");
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  return {c.g * sp, -c.g * sr * cp, -c.g * cr * cp};
}

Vec3 earth_rate_ned(double lat_rad, const EarthConstants& c) {
  if (!std::isfinite(lat_rad) || std::fabs(lat_rad) > kPi / 2.0 + 1e-12)
    throw invalid_input("earth_rate_ned: latitude outside [-pi/2, pi/2]");
  if (!c.valid()) throw invalid_input("earth_rate_ned: non-positive earth constants");
  return {c.omega_ie * std::cos(lat_rad), 0.0, -c.omega_ie * std::sin(lat_rad)};
}

Vec3 earth_rate_body(double lat_rad, const EulerAngles& e, const EarthConstants& c) {
  const Vec3 ned = earth_rate_ned(lat_rad, c);
  const Dcm t = dcm_from_euler(e);  // body -> NED; transpose projects NED -> body
  Vec3 body{};
  for (int i = 0; i < 3; ++i) {
    body[static_cast<std::size_t>(i)] =
        t.at(0, i) * ned[0] + t.at(1, i) * ned[1] + t.at(2, i) * ned[2];
  }
  return body;
}

}  // namespace gyro
