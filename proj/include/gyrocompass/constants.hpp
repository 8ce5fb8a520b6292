#pragma once

// Physical constants and the unit conversions the whole project depends on.
// Internal computation is radians and SI seconds; file and CLI boundaries speak
// degrees, deg/hr and the datasheet units (deg/sqrt(hr), deg/hr/sqrt(hr), mg).

#include <cmath>
#include <numbers>

namespace gyro {

struct EarthConstants {
  double omega_ie = 7.292115e-5;  // Earth rotation rate, rad/s (15.041 deg/hr)
  double g = 9.80665;             // gravity magnitude, m/s^2

  bool valid() const { return omega_ie > 0.0 && g > 0.0; }
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegPerRad = 180.0 / kPi;
inline constexpr double kRadPerDeg = kPi / 180.0;

// rad/s <-> deg/hr, the working unit of the model-facing pipeline.
inline constexpr double kDegHrPerRadS = kDegPerRad * 3600.0;

inline double rad_s_to_deg_hr(double w) { return w * kDegHrPerRadS; }
inline double deg_hr_to_rad_s(double w) { return w / kDegHrPerRadS; }

// Angle random walk: datasheet deg/sqrt(hr) -> per-sample white std in rad/s.
// deg/sqrt(hr) / 60 = deg/sqrt(s); multiplying by sqrt(rate) gives the discrete
// std whose integrated angle matches the continuous-time intensity.
inline double arw_white_sigma_rad_s(double arw_deg_rthr, double rate_hz) {
  return arw_deg_rthr * kRadPerDeg / 60.0 * std::sqrt(rate_hz);
}

// Bias instability deg/hr -> rad/s (steady-state std of the Gauss-Markov bias).
inline double bi_to_rad_s(double bi_deg_hr) { return bi_deg_hr * kRadPerDeg / 3600.0; }

// Rate random walk deg/hr/sqrt(hr) -> rad/s/sqrt(s):
// (pi/180)/3600/60 = (pi/180)/216000.
inline double rrw_to_rad_s_rts(double rrw) { return rrw * kRadPerDeg / 216000.0; }

// Accelerometer units: mg -> m/s^2 and mg/sqrt(Hz) noise density -> per-sample std.
inline double mg_to_m_s2(double mg) { return mg * 1e-3 * EarthConstants{}.g; }

inline double accel_white_sigma_m_s2(double density_mg_rthz, double rate_hz) {
  return mg_to_m_s2(density_mg_rthz) * std::sqrt(rate_hz);
}

}  // namespace gyro
