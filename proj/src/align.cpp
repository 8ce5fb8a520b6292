#include "gyrocompass/align.hpp"

#include <cmath>

#include "gyrocompass/error.hpp"

namespace gyro {

namespace {

constexpr double kPoleLimitRad = 89.0 * kRadPerDeg;

Vec3 mean_prefix(const std::vector<Vec3>& rows, std::size_t count) {
  Vec3 acc{};
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < 3; ++i) acc[i] += rows[k][i];
  for (auto& v : acc) v /= static_cast<double>(count);
  return acc;
}

}  // namespace

LevelingEstimate level_from_accel(const Vec3& mean_f) {
  const double norm = std::sqrt(mean_f[0] * mean_f[0] + mean_f[1] * mean_f[1] +
                                mean_f[2] * mean_f[2]);
  if (!(norm > 0.0)) throw degenerate("level_from_accel: zero specific-force vector");
  LevelingEstimate lv;
  lv.roll = std::atan2(-mean_f[1], -mean_f[2]);
  lv.pitch = std::atan(mean_f[0] / std::hypot(mean_f[1], mean_f[2]));
  return lv;
}

double heading_from_gyro_deg(const Vec3& mean_omega, const LevelingEstimate& lv) {
  const double cr = std::cos(lv.roll), sr = std::sin(lv.roll);
  const double cp = std::cos(lv.pitch), sp = std::sin(lv.pitch);
  const double s_psi = -mean_omega[1] * cr + mean_omega[2] * sr;
  const double c_psi = mean_omega[0] * cp + mean_omega[1] * sr * sp + mean_omega[2] * cr * sp;
  if (s_psi == 0.0 && c_psi == 0.0)
    throw degenerate("heading_from_gyro: indeterminate heading, zero planar signal");
  return wrap_deg(std::atan2(s_psi, c_psi) * kDegPerRad);
}

double heading_simplified_deg(const Vec3& mean_omega) {
  if (mean_omega[0] == 0.0 && mean_omega[1] == 0.0)
    throw degenerate("heading_simplified: indeterminate heading, zero planar signal");
  return wrap_deg(std::atan2(-mean_omega[1], mean_omega[0]) * kDegPerRad);
}

HeadingEstimate baseline_estimate(const ImuRecording& rec, double window_s) {
  if (std::fabs(rec.geo.latitude) > kPoleLimitRad)
    throw degenerate("baseline_estimate: latitude beyond 89 deg, heading unobservable");
  const auto want = static_cast<std::size_t>(std::llround(window_s * rec.sample_rate));
  if (want < 1 || want > rec.size())
    throw invalid_input("baseline_estimate: window outside recording length");

  const LevelingEstimate lv = level_from_accel(mean_prefix(rec.accel, want));
  const double yaw = heading_from_gyro_deg(mean_prefix(rec.gyro, want), lv);

  HeadingEstimate est;
  est.yaw_deg = yaw;
  est.window_s = window_s;
  est.n_samples = want;
  est.method = HeadingMethod::baseline;
  est.error_deg = wrap_signed_deg(yaw - rec.truth.yaw * kDegPerRad);
  return est;
}

TimeSeries running_rms(const ImuRecording& rec) {
  if (rec.size() == 0) throw invalid_input("running_rms: empty recording");
  TimeSeries out;
  out.t_s.reserve(rec.size());
  out.value.reserve(rec.size());
  Vec3 sum{};
  double norm_sq_acc = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i) sum[i] += rec.gyro[k][i];
    const double inv = 1.0 / static_cast<double>(k + 1);
    double mean_norm_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double m = sum[i] * inv;
      mean_norm_sq += m * m;
    }
    norm_sq_acc += mean_norm_sq;
    out.t_s.push_back(static_cast<double>(k + 1) / rec.sample_rate);
    out.value.push_back(rad_s_to_deg_hr(std::sqrt(norm_sq_acc * inv)));
  }
  return out;
}

TimeSeries snr_curve(const ImuRecording& rec) {
  if (rec.size() == 0) throw invalid_input("snr_curve: empty recording");
  if (!(rec.spec.arw > 0.0))
    throw invalid_input("snr_curve: undefined without white noise (arw = 0)");
  const double sigma = arw_white_sigma_rad_s(rec.spec.arw, rec.sample_rate);
  const double signal =
      EarthConstants{}.omega_ie * std::cos(rec.geo.latitude);  // planar norm, rad/s
  const double dt = 1.0 / rec.sample_rate;
  const double duration = rec.duration_s();

  TimeSeries out;
  // 20 points per decade from one sample period up to the full duration.
  for (int j = 0;; ++j) {
    double t = dt * std::pow(10.0, j / 20.0);
    if (t > duration) break;
    const double sigma_mean = sigma / std::sqrt(t * rec.sample_rate);
    out.t_s.push_back(t);
    out.value.push_back(20.0 * std::log10(signal / sigma_mean));
  }
  return out;
}

LevelingEstimate leveling_error_firstorder(const Vec3& delta_f, const EarthConstants& c) {
  LevelingEstimate e;
  e.roll = delta_f[1] / c.g;
  e.pitch = delta_f[0] / c.g;
  return e;
}

double heading_error_firstorder(double delta_f_y, double delta_omega_y, double lat_rad,
                                const EarthConstants& c) {
  if (std::fabs(lat_rad) >= kPoleLimitRad)
    throw degenerate("heading_error_firstorder: latitude too close to the pole");
  const double tl = std::tan(lat_rad);
  const double sl = 1.0 / std::cos(lat_rad);
  return -(delta_f_y / c.g) * tl + (delta_omega_y / c.omega_ie) * sl;
}

double crlb_mean_variance(double sigma, std::size_t n) {
  if (n == 0) throw invalid_input("crlb_mean_variance: n must be at least 1");
  if (!(sigma > 0.0)) throw invalid_input("crlb_mean_variance: sigma must be positive");
  return sigma * sigma / static_cast<double>(n);
}

}  // namespace gyro
