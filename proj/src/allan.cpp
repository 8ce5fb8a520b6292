#include "gyrocompass/allan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gyrocompass/constants.hpp"
#include "gyrocompass/error.hpp"
#include "gyrocompass/kernels.hpp"

namespace gyro {

std::vector<std::size_t> default_tau_samples(std::size_t n) {
  std::vector<std::size_t> taus;
  const std::size_t cap = n / 3;
  for (int j = 0;; ++j) {
    const auto m = static_cast<std::size_t>(std::llround(std::pow(10.0, j / 20.0)));
    if (m > cap) break;
    if (taus.empty() || m > taus.back()) taus.push_back(m);
  }
  return taus;
}

AllanCurve allan_variance(const std::vector<double>& rate_rad_s, double rate_hz,
                          const std::vector<std::size_t>& tau_samples) {
  const std::size_t n = rate_rad_s.size();
  if (n < 3) throw invalid_input("allan_variance: need at least 3 samples");
  if (!(rate_hz > 0.0)) throw invalid_input("allan_variance: sample rate must be positive");
  if (tau_samples.empty()) throw invalid_input("allan_variance: empty tau list");
  for (std::size_t i = 0; i < tau_samples.size(); ++i) {
    if (tau_samples[i] < 1 || 2 * tau_samples[i] > n - 1)
      throw invalid_input("allan_variance: tau outside [1, (n-1)/2] samples");
    if (i > 0 && tau_samples[i] <= tau_samples[i - 1])
      throw invalid_input("allan_variance: taus must be strictly increasing");
  }

  // Integrated angle; the cumulative sum is inherently serial.
  std::vector<double> phase(n + 1);
  const double dt = 1.0 / rate_hz;
  phase[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) phase[k + 1] = phase[k] + rate_rad_s[k] * dt;

  const auto& ops = kernels::active();
  AllanCurve curve;
  curve.tau_s.reserve(tau_samples.size());
  curve.adev_deg_hr.reserve(tau_samples.size());
  for (const std::size_t m : tau_samples) {
    const double tau = static_cast<double>(m) * dt;
    const std::size_t n_terms = n - 2 * m;
    const double power = ops.allan_sumsq(phase.data(), n_terms, m);
    const double avar = power / (2.0 * tau * tau * static_cast<double>(n_terms));
    curve.tau_s.push_back(tau);
    curve.adev_deg_hr.push_back(rad_s_to_deg_hr(std::sqrt(avar)));
  }
  return curve;
}

namespace {

constexpr std::size_t kSlopeWindow = 5;
constexpr std::size_t kMinRun = 3;
constexpr double kSlopeTol = 0.15;

// Least-squares slope of log10(adev) vs log10(tau) over points [first, first+W).
double window_slope(const std::vector<double>& lt, const std::vector<double>& la,
                    std::size_t first) {
  double st = 0.0, sa = 0.0, stt = 0.0, sta = 0.0;
  for (std::size_t i = first; i < first + kSlopeWindow; ++i) {
    st += lt[i];
    sa += la[i];
    stt += lt[i] * lt[i];
    sta += lt[i] * la[i];
  }
  const auto w = static_cast<double>(kSlopeWindow);
  return (w * sta - st * sa) / (w * stt - st * st);
}

struct Run {
  std::size_t first_point = 0;  // first curve point covered
  std::size_t last_point = 0;   // last curve point covered (inclusive)
};

// Runs of >= kMinRun consecutive windows whose slope is within tolerance of
// the target, reported as covered curve-point ranges.
std::vector<Run> regime_runs(const std::vector<double>& slopes, double target) {
  std::vector<Run> runs;
  std::size_t begin = 0, count = 0;
  auto flush = [&]() {
    if (count >= kMinRun)
      runs.push_back({begin, begin + count - 1 + kSlopeWindow - 1});
    count = 0;
  };
  for (std::size_t j = 0; j < slopes.size(); ++j) {
    if (std::fabs(slopes[j] - target) <= kSlopeTol) {
      if (count == 0) begin = j;
      ++count;
    } else {
      flush();
    }
  }
  flush();
  return runs;
}

// Intercept c of a fixed-slope fit log10(adev) = slope*log10(tau) + c.
double fixed_slope_intercept(const std::vector<double>& lt, const std::vector<double>& la,
                             const Run& run, double slope) {
  double acc = 0.0;
  for (std::size_t i = run.first_point; i <= run.last_point; ++i) acc += la[i] - slope * lt[i];
  return acc / static_cast<double>(run.last_point - run.first_point + 1);
}

}  // namespace

NoiseParams identify_noise_params(const AllanCurve& curve) {
  const std::size_t k = curve.tau_s.size();
  if (k != curve.adev_deg_hr.size() || k < kSlopeWindow + kMinRun - 1)
    throw invalid_input("identify_noise_params: curve too short");
  if (curve.tau_s.back() < 100.0 * curve.tau_s.front())
    throw invalid_input("identify_noise_params: curve must span at least two decades");

  std::vector<double> lt(k), la(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(curve.tau_s[i] > 0.0) || curve.adev_deg_hr[i] < 0.0)
      throw invalid_input("identify_noise_params: invalid curve values");
    lt[i] = std::log10(curve.tau_s[i]);
    // Guard exact zeros (noise-free curves) so the log stays finite.
    la[i] = std::log10(std::max(curve.adev_deg_hr[i], 1e-300));
  }

  std::vector<double> slopes(k - kSlopeWindow + 1);
  for (std::size_t j = 0; j < slopes.size(); ++j) slopes[j] = window_slope(lt, la, j);

  NoiseParams out;

  // ARW: earliest -0.5 run, fixed-slope value at tau = 1 s, deg/hr -> deg/sqrt(hr).
  const auto arw_runs = regime_runs(slopes, -0.5);
  if (!arw_runs.empty()) {
    const Run& run = arw_runs.front();
    const double c = fixed_slope_intercept(lt, la, run, -0.5);
    out.arw = std::pow(10.0, c) / 60.0;
    out.arw_fit = {true, curve.tau_s[run.first_point], curve.tau_s[run.last_point]};
  }

  // BI: minimum over all flat-classified points, divided by 0.664.
  const auto flat_runs = regime_runs(slopes, 0.0);
  if (!flat_runs.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    double tau_lo = 0.0, tau_hi = 0.0;
    for (const Run& run : flat_runs) {
      for (std::size_t i = run.first_point; i <= run.last_point; ++i)
        lo = std::min(lo, curve.adev_deg_hr[i]);
      if (tau_lo == 0.0) tau_lo = curve.tau_s[run.first_point];
      tau_hi = curve.tau_s[run.last_point];
    }
    out.bias_instability = lo / 0.664;
    out.bi_fit = {true, tau_lo, tau_hi};
  }

  // RRW: latest +0.5 run, fixed-slope value at tau = 3 hr.
  const auto rrw_runs = regime_runs(slopes, 0.5);
  if (!rrw_runs.empty()) {
    const Run& run = rrw_runs.back();
    const double c = fixed_slope_intercept(lt, la, run, 0.5);
    out.rrw = std::pow(10.0, c + 0.5 * std::log10(10800.0));
    out.rrw_fit = {true, curve.tau_s[run.first_point], curve.tau_s[run.last_point]};
  }

  return out;
}

}  // namespace gyro
