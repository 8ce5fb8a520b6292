#pragma once

// Classical coarse alignment: accelerometer leveling, gyrocompassing from the
// averaged gyro vector, the running-average baseline estimator, first-order
// error propagation, and the Cramer-Rao bound for the sample mean.

#include <optional>
#include <vector>

#include "gyrocompass/sensor_sim.hpp"

namespace gyro {

enum class HeadingMethod { baseline, learned };

struct HeadingEstimate {
  double yaw_deg = 0.0;  // [0, 360)
  double window_s = 0.0;
  std::size_t n_samples = 0;
  HeadingMethod method = HeadingMethod::baseline;
  std::optional<double> error_deg;  // cyclic difference vs truth, [-180, 180)
};

struct LevelingEstimate {
  double roll = 0.0;   // rad
  double pitch = 0.0;  // rad
};

struct TimeSeries {
  std::vector<double> t_s;
  std::vector<double> value;
};

// Roll/pitch from the mean specific force: roll = atan2(-f_y, -f_z),
// pitch = atan(f_x / hypot(f_y, f_z)). Throws on a zero vector.
LevelingEstimate level_from_accel(const Vec3& mean_f);

// Four-quadrant gyrocompassing from the mean gyro vector at a known level
// attitude. Throws when both arctangent arguments vanish.
double heading_from_gyro_deg(const Vec3& mean_omega, const LevelingEstimate& lv);

// Level-platform shortcut: wrap_deg(atan2(-omega_y, omega_x)).
double heading_simplified_deg(const Vec3& mean_omega);

// Average the first window_s seconds, level, then gyrocompass; error vs the
// recording's truth yaw is filled in. Refuses |latitude| > 89 deg.
HeadingEstimate baseline_estimate(const ImuRecording& rec, double window_s);

// Running RMS of the cumulative gyro mean norm, in deg/hr, one point per sample.
TimeSeries running_rms(const ImuRecording& rec);

// SNR of the sample mean vs averaging time, in dB, on a log-spaced time grid.
// Requires a spec with nonzero angle random walk.
TimeSeries snr_curve(const ImuRecording& rec);

// First-order leveling errors (Delta_roll, Delta_pitch) = (df_y/g, df_x/g).
LevelingEstimate leveling_error_firstorder(const Vec3& delta_f, const EarthConstants& c = {});

// First-order heading error -(df_y/g)tan(lat) + (dw_y/omega_ie)sec(lat), rad.
// Refuses |lat| >= 89 deg where the secant blows up.
double heading_error_firstorder(double delta_f_y, double delta_omega_y, double lat_rad,
                                const EarthConstants& c = {});

// Variance floor sigma^2 / n of any unbiased mean estimator.
double crlb_mean_variance(double sigma, std::size_t n);

}  // namespace gyro
