// Evaluation harness: window-sweep comparison of the learned heading
// regressor against the averaging baseline, boxplot statistics,
// time-to-accuracy interpolation, single-run traces, and the CSV writers
// behind every report the CLI emits.
#pragma once

#include <string>
#include <vector>

#include "gyrocompass/lstm.hpp"
#include "gyrocompass/sensor_sim.hpp"
#include "gyrocompass/train.hpp"

namespace gyro {

struct QuartileSummary {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

// Linear interpolation between order statistics (the "inclusive" scheme);
// IQR numbers depend on the method, so it is pinned here.
QuartileSummary quartiles(std::vector<double> values);

struct ComparisonRow {
  double window_s = 0.0;
  double baseline_median_deg = 0.0, baseline_iqr_deg = 0.0;
  double model_median_deg = 0.0, model_iqr_deg = 0.0;
  double improvement_pct = 0.0;  // 100 * (baseline - model) / baseline, from the stored medians
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // windows ascending
};

struct BoxplotRow {
  double window_s = 0.0;
  std::string method;  // "baseline" or "model"
  double q1_deg = 0.0, median_deg = 0.0, q3_deg = 0.0;
  double whisker_low_deg = 0.0, whisker_high_deg = 0.0;  // 1.5 IQR rule, clamped to data
  std::vector<double> outliers_deg;
};

struct BatchEvaluation {
  ComparisonTable comparison;
  std::vector<BoxplotRow> boxplot;
};

// Absolute cyclic heading errors per recording at each window, for both
// methods, aggregated to medians and IQRs. Truth is consulted only after the
// estimates exist.
BatchEvaluation evaluate_batch(const std::vector<ImuRecording>& test, const BiLstmModel& model,
                               const std::vector<double>& windows_s, double model_rate_hz);

struct TimeToAccuracyRow {
  double threshold_deg = 0.0;
  bool baseline_reachable = false;
  double baseline_s = 0.0;
  bool model_reachable = false;
  double model_s = 0.0;
  bool has_improvement = false;
  double improvement_pct = 0.0;
};

struct TimeToAccuracyTable {
  std::vector<double> grid_windows_s;  // the dense evaluation grid
  std::vector<double> baseline_median_deg, model_median_deg;
  std::vector<TimeToAccuracyRow> rows;
};

// Log-spaced window grid snapped to whole model steps, >= 8 points.
std::vector<double> default_time_accuracy_windows(double model_rate_hz, double max_window_s);

extern const std::vector<double> kDefaultAccuracyThresholdsDeg;  // {4.0 ... 1.5}

// Smallest window whose median error meets each threshold. A monotone
// decreasing median curve is interpolated linearly between grid points;
// otherwise the first grid window meeting the threshold is reported as-is.
TimeToAccuracyTable time_to_accuracy(const std::vector<ImuRecording>& test,
                                     const BiLstmModel& model, double model_rate_hz,
                                     const std::vector<double>& thresholds_deg,
                                     const std::vector<double>& grid_windows_s);

struct TraceRow {
  double t_s = 0.0;
  std::string method;  // "baseline" or "model"
  double estimate_deg = 0.0;
  double error_deg = 0.0;  // signed cyclic error vs truth
};

struct SingleRunTrace {
  double truth_yaw_deg = 0.0;
  std::vector<TraceRow> rows;  // baseline at each whole second, then one model row per window
};

SingleRunTrace single_run_trace(const ImuRecording& rec, const BiLstmModel& model,
                                const std::vector<double>& windows_s, double model_rate_hz);

void write_comparison_csv(const std::string& path, const ComparisonTable& table);
void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows);
void write_time_to_accuracy_csv(const std::string& path, const TimeToAccuracyTable& table);
void write_median_curve_csv(const std::string& path, const TimeToAccuracyTable& table);
void write_single_run_trace_csv(const std::string& path, const SingleRunTrace& trace);
void write_train_report_csv(const std::string& path, const TrainReport& report);

}  // namespace gyro
