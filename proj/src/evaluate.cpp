#include "gyrocompass/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gyrocompass/align.hpp"
#include "gyrocompass/dataset.hpp"
#include "gyrocompass/error.hpp"
#include "gyrocompass/frames.hpp"
#include "gyrocompass/textio.hpp"

namespace gyro {

QuartileSummary quartiles(std::vector<double> values) {
  if (values.empty()) throw invalid_input("quartiles: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto at = [&](double p) {
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return values[n - 1];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  return QuartileSummary{at(0.25), at(0.5), at(0.75)};
}

namespace {

double improvement_pct_from(double baseline_median, double model_median) {
  if (baseline_median > 0.0) return 100.0 * (baseline_median - model_median) / baseline_median;
  return model_median == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

double model_abs_error_deg(const BiLstmModel& model, const ImuRecording& rec, double window_s,
                           double model_rate_hz, LstmCache& cache) {
  const Sample s = make_sample(rec, window_s, model_rate_hz);
  const double pred = model.forward(s.seq, cache);
  return std::fabs(wrap_signed_deg(pred - s.label_deg));
}

double baseline_abs_error_deg(const ImuRecording& rec, double window_s) {
  const HeadingEstimate est = baseline_estimate(rec, window_s);
  return std::fabs(est.error_deg.value());
}

BoxplotRow boxplot_row(double window_s, const char* method, const std::vector<double>& errs) {
  const QuartileSummary q = quartiles(errs);
  BoxplotRow row;
  row.window_s = window_s;
  row.method = method;
  row.q1_deg = q.q1;
  row.median_deg = q.median;
  row.q3_deg = q.q3;
  const double lo_fence = q.q1 - 1.5 * q.iqr();
  const double hi_fence = q.q3 + 1.5 * q.iqr();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double e : errs) {
    if (e >= lo_fence && e <= hi_fence) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    } else {
      row.outliers_deg.push_back(e);
    }
  }
  // Quartiles always lie inside the fences, so at least one point does too.
  row.whisker_low_deg = lo;
  row.whisker_high_deg = hi;
  std::sort(row.outliers_deg.begin(), row.outliers_deg.end());
  return row;
}

}  // namespace

BatchEvaluation evaluate_batch(const std::vector<ImuRecording>& test, const BiLstmModel& model,
                               const std::vector<double>& windows_s, double model_rate_hz) {
  if (test.empty()) throw invalid_input("evaluate_batch: empty test set");
  if (windows_s.empty()) throw invalid_input("evaluate_batch: no windows requested");
  std::vector<double> windows = windows_s;
  std::sort(windows.begin(), windows.end());

  BatchEvaluation out;
  LstmCache cache;
  for (double w : windows) {
    std::vector<double> base_errs, model_errs;
    base_errs.reserve(test.size());
    model_errs.reserve(test.size());
    for (const ImuRecording& rec : test) {
      base_errs.push_back(baseline_abs_error_deg(rec, w));
      model_errs.push_back(model_abs_error_deg(model, rec, w, model_rate_hz, cache));
    }
    const QuartileSummary bq = quartiles(base_errs);
    const QuartileSummary mq = quartiles(model_errs);
    ComparisonRow row;
    row.window_s = w;
    row.baseline_median_deg = bq.median;
    row.baseline_iqr_deg = bq.iqr();
    row.model_median_deg = mq.median;
    row.model_iqr_deg = mq.iqr();
    row.improvement_pct = improvement_pct_from(bq.median, mq.median);
    out.comparison.rows.push_back(row);
    out.boxplot.push_back(boxplot_row(w, "baseline", base_errs));
    out.boxplot.push_back(boxplot_row(w, "model", model_errs));
  }
  return out;
}

const std::vector<double> kDefaultAccuracyThresholdsDeg = {4.0, 3.5, 3.0, 2.5, 2.0, 1.5};

std::vector<double> default_time_accuracy_windows(double model_rate_hz, double max_window_s) {
  if (!(model_rate_hz > 0.0) || !(max_window_s > 0.0))
    throw invalid_input("default_time_accuracy_windows: rates must be positive");
  const double step = 1.0 / model_rate_hz;
  const double lo = std::max(5.0, step);
  if (max_window_s < 2.0 * lo)
    throw invalid_input("default_time_accuracy_windows: recording too short for a grid");
  constexpr int kPoints = 12;
  std::vector<double> grid;
  for (int i = 0; i < kPoints; ++i) {
    const double f = static_cast<double>(i) / (kPoints - 1);
    const double w = std::exp(std::log(lo) + f * (std::log(max_window_s) - std::log(lo)));
    const double snapped = std::max(step, static_cast<double>(std::llround(w / step)) * step);
    if (grid.empty() || snapped > grid.back()) grid.push_back(snapped);
  }
  return grid;
}

TimeToAccuracyTable time_to_accuracy(const std::vector<ImuRecording>& test,
                                     const BiLstmModel& model, double model_rate_hz,
                                     const std::vector<double>& thresholds_deg,
                                     const std::vector<double>& grid_windows_s) {
  if (test.empty()) throw invalid_input("time_to_accuracy: empty test set");
  if (thresholds_deg.empty()) throw invalid_input("time_to_accuracy: no thresholds");
  std::vector<double> grid = grid_windows_s;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const double duration = test.front().duration_s();
  grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double w) { return w > duration; }),
             grid.end());
  if (grid.size() < 8)
    throw invalid_input("time_to_accuracy: need at least 8 usable grid windows");

  TimeToAccuracyTable table;
  table.grid_windows_s = grid;
  LstmCache cache;
  for (double w : grid) {
    std::vector<double> base_errs, model_errs;
    for (const ImuRecording& rec : test) {
      base_errs.push_back(baseline_abs_error_deg(rec, w));
      model_errs.push_back(model_abs_error_deg(model, rec, w, model_rate_hz, cache));
    }
    table.baseline_median_deg.push_back(quartiles(base_errs).median);
    table.model_median_deg.push_back(quartiles(model_errs).median);
  }

  auto first_crossing = [&](const std::vector<double>& medians, double thr, bool& reachable) {
    reachable = false;
    std::size_t hit = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (medians[i] <= thr) {
        hit = i;
        break;
      }
    if (hit == grid.size()) return 0.0;
    reachable = true;
    if (hit == 0) return grid[0];
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
      if (medians[i] > medians[i - 1]) {
        monotone = false;
        break;
      }
    // A curve that is not monotone gets the bracketing grid window instead of
    // a crossing point interpolated from a slope that may not exist.
    if (!monotone) return grid[hit];
    const double m0 = medians[hit - 1], m1 = medians[hit];
    if (m0 <= m1) return grid[hit];
    const double f = (m0 - thr) / (m0 - m1);
    return grid[hit - 1] + f * (grid[hit] - grid[hit - 1]);
  };

  for (double thr : thresholds_deg) {
    TimeToAccuracyRow row;
    row.threshold_deg = thr;
    row.baseline_s = first_crossing(table.baseline_median_deg, thr, row.baseline_reachable);
    row.model_s = first_crossing(table.model_median_deg, thr, row.model_reachable);
    if (row.baseline_reachable && row.model_reachable && row.baseline_s > 0.0) {
      row.has_improvement = true;
      row.improvement_pct = 100.0 * (row.baseline_s - row.model_s) / row.baseline_s;
    }
    table.rows.push_back(row);
  }
  return table;
}

SingleRunTrace single_run_trace(const ImuRecording& rec, const BiLstmModel& model,
                                const std::vector<double>& windows_s, double model_rate_hz) {
  SingleRunTrace trace;
  trace.truth_yaw_deg = wrap_deg(rec.truth.yaw * kDegPerRad);
  const auto whole_seconds = static_cast<long>(rec.duration_s());
  for (long t = 1; t <= whole_seconds; ++t) {
    const HeadingEstimate est = baseline_estimate(rec, static_cast<double>(t));
    trace.rows.push_back(TraceRow{static_cast<double>(t), "baseline", est.yaw_deg,
                                  est.error_deg.value()});
  }
  std::vector<double> windows = windows_s;
  std::sort(windows.begin(), windows.end());
  LstmCache cache;
  for (double w : windows) {
    const Sample s = make_sample(rec, w, model_rate_hz);
    const double pred = wrap_deg(model.forward(s.seq, cache));
    trace.rows.push_back(TraceRow{w, "model", pred, wrap_signed_deg(pred - trace.truth_yaw_deg)});
  }
  return trace;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_comparison_csv(const std::string& path, const ComparisonTable& table) {
  std::ofstream out = open_out(path);
  out << "window_s,method,median_deg,iqr_deg,improvement_pct\n";
  for (const ComparisonRow& r : table.rows) {
    out << fmt_g17(r.window_s) << ",baseline," << fmt_g17(r.baseline_median_deg) << ','
        << fmt_g17(r.baseline_iqr_deg) << ",\n";
    out << fmt_g17(r.window_s) << ",model," << fmt_g17(r.model_median_deg) << ','
        << fmt_g17(r.model_iqr_deg) << ',' << fmt_g17(r.improvement_pct) << '\n';
  }
}

void write_boxplot_csv(const std::string& path, const std::vector<BoxplotRow>& rows) {
  std::ofstream out = open_out(path);
  out << "window_s,method,q1_deg,median_deg,q3_deg,whisker_low_deg,whisker_high_deg,outliers_deg\n";
  for (const BoxplotRow& r : rows) {
    out << fmt_g17(r.window_s) << ',' << r.method << ',' << fmt_g17(r.q1_deg) << ','
        << fmt_g17(r.median_deg) << ',' << fmt_g17(r.q3_deg) << ',' << fmt_g17(r.whisker_low_deg)
        << ',' << fmt_g17(r.whisker_high_deg) << ',';
    for (std::size_t i = 0; i < r.outliers_deg.size(); ++i)
      out << (i ? ";" : "") << fmt_g17(r.outliers_deg[i]);
    out << '\n';
  }
}

void write_time_to_accuracy_csv(const std::string& path, const TimeToAccuracyTable& table) {
  std::ofstream out = open_out(path);
  out << "threshold_deg,baseline_s,model_s,improvement_pct\n";
  for (const TimeToAccuracyRow& r : table.rows) {
    out << fmt_g17(r.threshold_deg) << ',';
    if (r.baseline_reachable) out << fmt_g17(r.baseline_s);
    else out << "NA";
    out << ',';
    if (r.model_reachable) out << fmt_g17(r.model_s);
    else out << "NA";
    out << ',';
    if (r.has_improvement) out << fmt_g17(r.improvement_pct);
    else out << "NA";
    out << '\n';
  }
}

void write_median_curve_csv(const std::string& path, const TimeToAccuracyTable& table) {
  std::ofstream out = open_out(path);
  out << "window_s,baseline_median_deg,model_median_deg\n";
  for (std::size_t i = 0; i < table.grid_windows_s.size(); ++i)
    out << fmt_g17(table.grid_windows_s[i]) << ',' << fmt_g17(table.baseline_median_deg[i]) << ','
        << fmt_g17(table.model_median_deg[i]) << '\n';
}

void write_single_run_trace_csv(const std::string& path, const SingleRunTrace& trace) {
  std::ofstream out = open_out(path);
  out << "# truth_yaw_deg=" << fmt_g17(trace.truth_yaw_deg) << "\n";
  out << "t_s,method,estimate_deg,error_deg\n";
  for (const TraceRow& r : trace.rows)
    out << fmt_g17(r.t_s) << ',' << r.method << ',' << fmt_g17(r.estimate_deg) << ','
        << fmt_g17(r.error_deg) << '\n';
}

void write_train_report_csv(const std::string& path, const TrainReport& report) {
  std::ofstream out = open_out(path);
  out << "# best_epoch=" << report.best_epoch << "\n";
  out << "# best_val_crmse_deg=" << fmt_g17(report.best_val_crmse_deg) << "\n";
  out << "epoch,train_crmse_deg,val_crmse_deg\n";
  for (std::size_t i = 0; i < report.train_crmse_deg.size(); ++i)
    out << (i + 1) << ',' << fmt_g17(report.train_crmse_deg[i]) << ','
        << fmt_g17(report.val_crmse_deg[i]) << '\n';
}

}  // namespace gyro
