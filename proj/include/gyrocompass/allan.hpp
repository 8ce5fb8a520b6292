#pragma once

// Overlapping Allan variance on integrated angle, plus extraction of the three
// noise regimes (angle random walk, bias instability, rate random walk) from
// the log-log Allan deviation curve.

#include <cstddef>
#include <vector>

namespace gyro {

struct AllanCurve {
  std::vector<double> tau_s;        // strictly increasing
  std::vector<double> adev_deg_hr;  // Allan deviation per tau
};

struct RegimeFit {
  bool present = false;
  double tau_min_s = 0.0;  // tau range of the points the fit used
  double tau_max_s = 0.0;
};

struct NoiseParams {
  double arw = 0.0;               // deg/sqrt(hr)
  double bias_instability = 0.0;  // deg/hr
  double rrw = 0.0;               // deg/hr/sqrt(hr)
  RegimeFit arw_fit, bi_fit, rrw_fit;
};

// Log-spaced averaging windows in samples, 20 per decade, capped at n/3.
std::vector<std::size_t> default_tau_samples(std::size_t n);

// Overlapping estimator: integrate rate to angle, take second differences at
// stride m, normalize by 1/(2 tau^2 (n - 2m)). taus are strictly increasing
// sample counts, each within [1, (n-1)/2].
AllanCurve allan_variance(const std::vector<double>& rate_rad_s, double rate_hz,
                          const std::vector<std::size_t>& tau_samples);

// Classify slope regimes with windowed least squares (window of 5 points, at
// least 3 consecutive qualifying windows, slope tolerance 0.15) and read off:
//   ARW  from a fixed -0.5 fit evaluated at tau = 1 s (deg/hr -> /60),
//   BI   as the flat-regime minimum divided by 0.664,
//   RRW  from a fixed +0.5 fit evaluated at tau = 3 hr.
// Regimes without a qualifying run come back with present = false.
NoiseParams identify_noise_params(const AllanCurve& curve);

}  // namespace gyro
