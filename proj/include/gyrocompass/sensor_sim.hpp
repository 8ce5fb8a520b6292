#pragma once

// Stationary IMU simulation with the linearized measurement model
//   gyro[k]  = (I + M) * omega_body + b0 + b_gm[k] + d_rrw[k] + w[k]
//   accel[k] = f_body + b_a + w_a[k]
// where b0 is a per-run constant uniform draw, b_gm a first-order Gauss-Markov
// process whose steady-state std is the configured bias instability, d_rrw an
// integrated-white rate random walk starting at zero, and w white Gaussian
// noise derived from the angle-random-walk density.

#include <cstdint>
#include <vector>

#include "gyrocompass/frames.hpp"

namespace gyro {

struct SensorSpec {
  double sample_rate = 600.0;          // Hz
  double arw = 0.02;                   // deg/sqrt(hr), gyro angle random walk
  double bias_instability = 1.0;       // deg/hr, Gauss-Markov steady-state std
  double rrw = 0.0;                    // deg/hr/sqrt(hr), rate random walk driver
  double gm_correlation_time = 250.0;  // s
  double initial_bias_range = 0.0;     // deg/hr, uniform half-width per axis
  std::array<double, 9> scale_factor_error{};  // row-major M, dimensionless
  double accel_noise_density = 0.0;    // mg/sqrt(Hz)
  double accel_bias_range = 0.0;       // mg, uniform half-width per axis

  bool valid() const;
};

// Named configurations used across tests and the CLI.
SensorSpec spec_clean(double sample_rate);      // all stochastic terms zero
SensorSpec spec_datasheet(double sample_rate);  // ARW 0.02, BI 1.0
SensorSpec spec_empirical(double sample_rate);  // ARW 0.03, BI 0.2
SensorSpec spec_drifting(double sample_rate);   // turn-on bias + GM + strong RRW

struct ImuRecording {
  std::vector<Vec3> gyro;   // rad/s
  std::vector<Vec3> accel;  // m/s^2
  double sample_rate = 0.0;
  EulerAngles truth;
  GeoLocation geo;
  std::uint64_t seed = 0;
  SensorSpec spec;

  std::size_t size() const { return gyro.size(); }
  double duration_s() const { return static_cast<double>(gyro.size()) / sample_rate; }
};

// Deterministic given (spec, truth, geo, duration, seed).
ImuRecording simulate_stationary(const SensorSpec& spec, const EulerAngles& truth,
                                 const GeoLocation& geo, double duration_s,
                                 std::uint64_t seed);

// Mean measurement minus the true stationary signal: (delta_f, delta_omega).
struct MeanResidual {
  Vec3 accel;  // m/s^2
  Vec3 gyro;   // rad/s
};
MeanResidual sample_mean_residual(const ImuRecording& rec);

}  // namespace gyro
