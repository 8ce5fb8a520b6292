#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "gyrocompass/align.hpp"
#include "gyrocompass/error.hpp"

using namespace gyro;

TEST_CASE("leveling and gyrocompassing are exact on noise-free signals") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    EulerAngles truth;
    truth.roll = (u01(rng) * 2.0 - 1.0) * 175.0 * kRadPerDeg;
    truth.pitch = (u01(rng) * 2.0 - 1.0) * 80.0 * kRadPerDeg;
    truth.yaw = u01(rng) * 360.0 * kRadPerDeg;
    const double lat = (u01(rng) * 2.0 - 1.0) * 85.0 * kRadPerDeg;

    const LevelingEstimate lv = level_from_accel(gravity_body(truth));
    CHECK(std::fabs(lv.roll - truth.roll) < 1e-9);
    CHECK(std::fabs(lv.pitch - truth.pitch) < 1e-9);

    const double yaw_deg = heading_from_gyro_deg(earth_rate_body(lat, truth), lv);
    CHECK(std::fabs(wrap_signed_deg(yaw_deg - truth.yaw * kDegPerRad)) < 1e-9);
  }
}

TEST_CASE("baseline estimate recovers the exact heading from a clean recording") {
  for (double yaw_deg : {10.0, 123.4, 250.0, 359.0}) {
    const EulerAngles truth{3.0 * kRadPerDeg, -2.0 * kRadPerDeg, yaw_deg * kRadPerDeg};
    const GeoLocation geo{32.76 * kRadPerDeg, 0.0};
    const ImuRecording rec = simulate_stationary(spec_clean(50.0), truth, geo, 2.0, 1);
    const HeadingEstimate est = baseline_estimate(rec, 2.0);
    CHECK(est.n_samples == 100);
    CHECK(est.window_s == 2.0);
    CHECK(est.method == HeadingMethod::baseline);
    REQUIRE(est.error_deg.has_value());
    CHECK(std::fabs(*est.error_deg) < 1e-9);
    CHECK(std::fabs(wrap_signed_deg(est.yaw_deg - yaw_deg)) < 1e-9);
    CHECK(est.yaw_deg >= 0.0);
    CHECK(est.yaw_deg < 360.0);
  }
}

TEST_CASE("baseline estimate validates the window and the latitude") {
  const ImuRecording rec =
      simulate_stationary(spec_clean(50.0), EulerAngles{}, GeoLocation{0.5, 0.0}, 1.0, 1);
  CHECK_THROWS_AS(baseline_estimate(rec, 0.0), Error);
  CHECK_THROWS_AS(baseline_estimate(rec, 1.5), Error);
  ImuRecording polar = rec;
  polar.geo.latitude = 89.5 * kRadPerDeg;
  CHECK_THROWS_AS(baseline_estimate(polar, 1.0), Error);
}

TEST_CASE("degenerate signal vectors are refused") {
  CHECK_THROWS_AS(level_from_accel(Vec3{0.0, 0.0, 0.0}), Error);
  // vertical-only rate: both arctangent arguments vanish at a level attitude
  CHECK_THROWS_AS(heading_from_gyro_deg(Vec3{0.0, 0.0, -7e-5}, LevelingEstimate{}), Error);
  CHECK_THROWS_AS(heading_simplified_deg(Vec3{0.0, 0.0, -7e-5}), Error);
}

TEST_CASE("simplified heading matches the full form on a level platform") {
  for (double yaw_deg : {0.0, 45.0, 137.0, 200.5, 330.0}) {
    const Vec3 w =
        earth_rate_body(40.0 * kRadPerDeg, EulerAngles{0.0, 0.0, yaw_deg * kRadPerDeg});
    const double full = heading_from_gyro_deg(w, LevelingEstimate{});
    const double simp = heading_simplified_deg(w);
    CHECK(std::fabs(wrap_signed_deg(full - simp)) < 1e-10);
    CHECK(std::fabs(wrap_signed_deg(simp - yaw_deg)) < 1e-10);
  }
}

TEST_CASE("first-order leveling errors match the estimator shift") {
  const EarthConstants ec;
  const Vec3 df{2e-4 * ec.g, -1.5e-4 * ec.g, 0.0};
  const LevelingEstimate pred = leveling_error_firstorder(df);
  const LevelingEstimate act = level_from_accel(Vec3{df[0], df[1], -ec.g});
  // pitch is signed; the roll channel predicts the tilt magnitude
  CHECK(act.pitch == doctest::Approx(pred.pitch).epsilon(1e-3));
  CHECK(std::fabs(act.roll) == doctest::Approx(std::fabs(pred.roll)).epsilon(1e-3));
}

TEST_CASE("first-order heading error matches the nonlinear chain at 180 deg heading") {
  const EarthConstants ec;
  for (double lat_deg : {0.0, 32.76, 60.0}) {
    const double lat = lat_deg * kRadPerDeg;
    const EulerAngles truth{0.0, 0.0, kPi};
    const Vec3 f0 = gravity_body(truth);
    const Vec3 w0 = earth_rate_body(lat, truth);
    const double dfy = 2e-4 * ec.g;
    const double dwy = -1.2e-4 * ec.omega_ie;
    const LevelingEstimate lv = level_from_accel(Vec3{f0[0], f0[1] + dfy, f0[2]});
    const double yaw = heading_from_gyro_deg(Vec3{w0[0], w0[1] + dwy, w0[2]}, lv);
    const double actual = wrap_signed_deg(yaw - 180.0) * kRadPerDeg;
    const double pred = heading_error_firstorder(dfy, dwy, lat);
    CHECK(actual == doctest::Approx(pred).epsilon(0.01));
  }
  CHECK_THROWS_AS(heading_error_firstorder(1e-4, 1e-9, 89.5 * kRadPerDeg), Error);
}

TEST_CASE("sample mean attains the variance floor on white noise") {
  SensorSpec spec = spec_clean(100.0);
  spec.arw = 0.05;
  const double sigma = arw_white_sigma_rad_s(spec.arw, spec.sample_rate);
  for (std::size_t n : {std::size_t{100}, std::size_t{10000}}) {
    const double duration = static_cast<double>(n) / spec.sample_rate;
    double acc = 0.0;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      const ImuRecording rec = simulate_stationary(spec, EulerAngles{},
                                                   GeoLocation{0.0, 0.0}, duration, 1000 + trial);
      const MeanResidual res = sample_mean_residual(rec);
      for (std::size_t i = 0; i < 3; ++i) acc += res.gyro[i] * res.gyro[i];
    }
    const double empirical = acc / 3000.0;
    const double ratio = empirical / crlb_mean_variance(sigma, n);
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.15);
  }
  CHECK_THROWS_AS(crlb_mean_variance(0.0, 10), Error);
  CHECK_THROWS_AS(crlb_mean_variance(1.0, 0), Error);
}

TEST_CASE("running rms is the constant earth-rate norm on a clean recording") {
  const EulerAngles truth{0.05, -0.2, 1.0};
  const GeoLocation geo{45.0 * kRadPerDeg, 0.0};
  const ImuRecording rec = simulate_stationary(spec_clean(20.0), truth, geo, 5.0, 2);
  const TimeSeries rms = running_rms(rec);
  REQUIRE(rms.t_s.size() == rec.size());
  const Vec3 w = earth_rate_body(geo.latitude, truth);
  const double expected =
      rad_s_to_deg_hr(std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]));
  for (double v : rms.value) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rms.t_s.front() == doctest::Approx(1.0 / 20.0));
  CHECK(rms.t_s.back() == doctest::Approx(5.0));
}

TEST_CASE("snr curve gains ten dB per decade of averaging time") {
  CHECK_THROWS_AS(
      snr_curve(simulate_stationary(spec_clean(50.0), EulerAngles{}, GeoLocation{0.5, 0.0},
                                    1.0, 3)),
      Error);
  SensorSpec spec = spec_clean(50.0);
  spec.arw = 0.02;
  const ImuRecording rec = simulate_stationary(
      spec, EulerAngles{}, GeoLocation{32.76 * kRadPerDeg, 0.0}, 100.0, 4);
  const TimeSeries snr = snr_curve(rec);
  REQUIRE(snr.t_s.size() > 40);
  for (std::size_t j = 0; j + 20 < snr.t_s.size(); ++j) {
    CHECK(snr.t_s[j + 20] / snr.t_s[j] == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(snr.value[j + 20] - snr.value[j] == doctest::Approx(10.0).epsilon(1e-9));
  }
}
