#pragma once

// Coordinate frames: Euler angle / direction cosine matrix conversions and the
// projections of gravity and Earth rotation into the body frame. Angles are
// radians internally; wrap_deg/wrap_signed_deg serve the degree-speaking
// boundaries (files, CLI, loss function).

#include <array>

#include "gyrocompass/constants.hpp"

namespace gyro {

using Vec3 = std::array<double, 3>;

// Attitude as z-y-x Euler angles. Invariants at external boundaries:
// roll in [-pi, pi), pitch in [-pi/2, pi/2], yaw in [0, 2*pi).
struct EulerAngles {
  double roll = 0.0;   // rad
  double pitch = 0.0;  // rad
  double yaw = 0.0;    // rad
};

// Row-major 3x3 direction cosine matrix (body -> NED when built from Euler
// angles here).
struct Dcm {
  std::array<double, 9> m{};

  double at(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
  double& at(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

  // Max deviation of T^T * T from identity, for orthonormality checks.
  double orthonormality_error() const;
  double determinant() const;
};

struct GeoLocation {
  double latitude = 0.0;   // rad, in [-pi/2, pi/2]
  double longitude = 0.0;  // rad, in [-pi, pi)
};

// Reduce an angle in degrees to [0, 360).
double wrap_deg(double angle_deg);

// Cyclic difference in degrees reduced to [-180, 180). Exact in floating point
// (IEEE remainder), which the cyclic loss and error accounting rely on.
double wrap_signed_deg(double angle_deg);

// Body -> NED rotation built from z-y-x Euler angles.
Dcm dcm_from_euler(const EulerAngles& e);

// Inverse of dcm_from_euler; throws a degenerate-attitude error within
// 1e-9 of gimbal lock (|T31| -> 1).
EulerAngles euler_from_dcm(const Dcm& t);

// Specific force sensed by a stationary accelerometer triad at attitude e:
// g * (sin(pitch), -sin(roll)cos(pitch), -cos(roll)cos(pitch)). Yaw-free.
Vec3 gravity_body(const EulerAngles& e, const EarthConstants& c = {});

// Earth rotation in NED at a latitude: omega_ie * (cos lat, 0, -sin lat).
Vec3 earth_rate_ned(double lat_rad, const EarthConstants& c = {});

// Earth rotation projected into the body frame; preserves the omega_ie norm.
Vec3 earth_rate_body(double lat_rad, const EulerAngles& e, const EarthConstants& c = {});

}  // namespace gyro
