// gyrocompass CLI: simulate stationary IMU recordings, identify noise with
// Allan deviation, build datasets, train the heading regressor, and evaluate
// it against the averaging baseline.
//
// Exit codes: 0 success, 64 usage, 65 malformed data, 66 missing input file,
// 70 internal failure. Errors print one line to stderr as
// "error: <kind>: <message>".

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gyrocompass/align.hpp"
#include "gyrocompass/allan.hpp"
#include "gyrocompass/dataset.hpp"
#include "gyrocompass/error.hpp"
#include "gyrocompass/evaluate.hpp"
#include "gyrocompass/frames.hpp"
#include "gyrocompass/lstm.hpp"
#include "gyrocompass/sensor_sim.hpp"
#include "gyrocompass/textio.hpp"
#include "gyrocompass/train.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitMissingFile = 66;
constexpr int kExitInternal = 70;

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message) {
  std::fprintf(stderr, "error: %s: %s\n", kind.c_str(), message.c_str());
  std::exit(code);
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(kExitMissingFile, "missing-file", path);
}

gyro::SensorSpec preset_by_name(const std::string& name, double sample_rate) {
  if (name == "clean") return gyro::spec_clean(sample_rate);
  if (name == "datasheet") return gyro::spec_datasheet(sample_rate);
  if (name == "empirical") return gyro::spec_empirical(sample_rate);
  if (name == "drifting") return gyro::spec_drifting(sample_rate);
  fail(kExitUsage, "usage", "unknown preset '" + name + "'");
}

std::string rec_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rec_%03zu", index);
  return std::string(buf) + ".csv";
}

std::vector<gyro::ImuRecording> load_recordings_by_id(const std::string& dir,
                                                      const std::vector<std::string>& ids) {
  std::vector<gyro::ImuRecording> recs;
  for (const std::string& id : ids) {
    const std::string path = dir + "/" + id + ".csv";
    require_file(path);
    recs.push_back(gyro::load_recording(path));
  }
  return recs;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out_dir;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::string preset = "datasheet";
  double duration_s = 240.0;
  double rate_hz = 50.0;
  double lat_deg = 32.76;
  double lon_deg = 0.0;
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  std::optional<double> yaw_deg;  // absent: uniform random per recording
  std::optional<double> arw, bi, rrw, tau, bias_range, accel_nd, accel_bias;
};

int run_simulate(const SimulateArgs& a) {
  gyro::SensorSpec spec = preset_by_name(a.preset, a.rate_hz);
  if (a.arw) spec.arw = *a.arw;
  if (a.bi) spec.bias_instability = *a.bi;
  if (a.rrw) spec.rrw = *a.rrw;
  if (a.tau) spec.gm_correlation_time = *a.tau;
  if (a.bias_range) spec.initial_bias_range = *a.bias_range;
  if (a.accel_nd) spec.accel_noise_density = *a.accel_nd;
  if (a.accel_bias) spec.accel_bias_range = *a.accel_bias;

  gyro::GeoLocation geo{a.lat_deg * gyro::kRadPerDeg, a.lon_deg * gyro::kRadPerDeg};
  std::filesystem::create_directories(a.out_dir);

  // One master stream fixes every per-recording yaw and seed.
  std::mt19937_64 master(a.seed);
  std::uniform_real_distribution<double> yaw_dist(0.0, 360.0);
  for (std::size_t i = 0; i < a.count; ++i) {
    const double yaw = a.yaw_deg ? *a.yaw_deg : yaw_dist(master);
    const std::uint64_t rec_seed = master();
    gyro::EulerAngles truth{a.roll_deg * gyro::kRadPerDeg, a.pitch_deg * gyro::kRadPerDeg,
                            yaw * gyro::kRadPerDeg};
    const gyro::ImuRecording rec =
        gyro::simulate_stationary(spec, truth, geo, a.duration_s, rec_seed);
    gyro::save_recording(rec, a.out_dir + "/" + rec_filename(i));
  }
  std::printf("wrote %zu recordings to %s\n", a.count, a.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- allan

int run_allan(const std::string& input, const std::string& out_curve,
              const std::string& out_params) {
  require_file(input);
  const gyro::ImuRecording rec = gyro::load_recording(input);

  std::vector<gyro::AllanCurve> curves;
  std::vector<gyro::NoiseParams> params;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    std::vector<double> rate(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) rate[k] = rec.gyro[k][axis];
    gyro::AllanCurve curve =
        gyro::allan_variance(rate, rec.sample_rate, gyro::default_tau_samples(rec.size()));
    params.push_back(gyro::identify_noise_params(curve));
    curves.push_back(std::move(curve));
  }

  std::ofstream out(out_curve);
  if (!out) fail(kExitData, "write-failed", out_curve);
  out << "tau_s,adev_x_deg_hr,adev_y_deg_hr,adev_z_deg_hr\n";
  for (std::size_t i = 0; i < curves[0].tau_s.size(); ++i) {
    out << gyro::fmt_g17(curves[0].tau_s[i]);
    for (std::size_t axis = 0; axis < 3; ++axis)
      out << ',' << gyro::fmt_g17(curves[axis].adev_deg_hr[i]);
    out << '\n';
  }

  nlohmann::json j;
  const char* names[3] = {"x", "y", "z"};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const gyro::NoiseParams& p = params[axis];
    nlohmann::json jp;
    jp["arw_deg_rthr"] = p.arw_fit.present ? nlohmann::json(p.arw) : nlohmann::json();
    jp["bias_instability_deg_hr"] =
        p.bi_fit.present ? nlohmann::json(p.bias_instability) : nlohmann::json();
    jp["rrw_deg_hr_rthr"] = p.rrw_fit.present ? nlohmann::json(p.rrw) : nlohmann::json();
    for (const auto& [fit, name] :
         {std::pair{&p.arw_fit, "arw_fit"}, {&p.bi_fit, "bi_fit"}, {&p.rrw_fit, "rrw_fit"}}) {
      jp[name] = {{"present", fit->present},
                  {"tau_min_s", fit->tau_min_s},
                  {"tau_max_s", fit->tau_max_s}};
    }
    j[names[axis]] = jp;
  }
  std::ofstream op(out_params);
  if (!op) fail(kExitData, "write-failed", out_params);
  op << j.dump(2) << "\n";
  std::printf("wrote %s and %s\n", out_curve.c_str(), out_params.c_str());
  return 0;
}

// ---------------------------------------------------------------- dataset

struct DatasetArgs {
  std::string recordings_dir;
  std::string out_dir;
  double model_rate_hz = 0.5;
  std::vector<double> windows_s = {10.0, 20.0, 30.0, 60.0, 240.0};
  std::uint64_t split_seed = 1;
  std::uint64_t augment_seed = 2;
  bool augment = false;
  gyro::AugmentConfig augment_cfg;
  gyro::SplitRatios ratios;
};

int run_dataset(const DatasetArgs& a) {
  require_file(a.recordings_dir);
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(a.recordings_dir)) {
    if (entry.path().extension() == ".csv") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) fail(kExitData, "empty-input", "no .csv recordings in " + a.recordings_dir);

  std::vector<std::vector<gyro::Sample>> groups;
  for (const std::string& id : ids) {
    const gyro::ImuRecording rec = gyro::load_recording(a.recordings_dir + "/" + id + ".csv");
    std::vector<gyro::Sample> group;
    for (double w : a.windows_s) group.push_back(gyro::make_sample(rec, w, a.model_rate_hz, id));
    groups.push_back(std::move(group));
  }

  gyro::DatasetSplit split = gyro::split_dataset(groups, a.ratios, a.split_seed);
  if (a.augment) {
    // Augmenting after the recording-level split keeps every rotated copy of
    // a recording inside one split. The test set stays raw.
    split.train = gyro::augment(split.train, a.augment_cfg, a.augment_seed);
    split.validation = gyro::augment(split.validation, a.augment_cfg, a.augment_seed + 1);
  }

  auto ids_of = [](const std::vector<gyro::Sample>& samples) {
    std::vector<std::string> out;
    for (const gyro::Sample& s : samples)
      if (out.empty() || out.back() != s.source_id) out.push_back(s.source_id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  gyro::DatasetManifest manifest;
  manifest.model_rate_hz = a.model_rate_hz;
  manifest.windows_s = a.windows_s;
  manifest.split_seed = a.split_seed;
  manifest.augment_seed = a.augment_seed;
  manifest.augmented = a.augment;
  manifest.augment_cfg = a.augment_cfg;
  manifest.train_ids = ids_of(split.train);
  manifest.validation_ids = ids_of(split.validation);
  manifest.test_ids = ids_of(split.test);
  manifest.recordings_dir = a.recordings_dir;
  gyro::save_dataset(a.out_dir, manifest, split);
  std::printf("dataset: %zu train / %zu validation / %zu test samples -> %s\n",
              split.train.size(), split.validation.size(), split.test.size(), a.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string dataset_dir;
  std::string checkpoint_path = "checkpoint.json";
  std::string report_path = "train_report.csv";
  int layers = 2;
  int hidden = 16;
  gyro::TrainConfig cfg;
  std::uint64_t init_seed = 10;
};

int run_train(const TrainArgs& a) {
  require_file(a.dataset_dir + "/manifest.json");
  const gyro::LoadedDataset data = gyro::load_dataset(a.dataset_dir);
  gyro::BiLstmConfig mcfg;
  mcfg.num_layers = a.layers;
  mcfg.hidden_size = a.hidden;
  gyro::BiLstmModel model = gyro::BiLstmModel::random_init(mcfg, a.init_seed);
  const gyro::TrainReport report = gyro::train(model, data.split, a.cfg);

  gyro::CheckpointMeta meta;
  meta.init_seed = a.init_seed;
  meta.train_seed = a.cfg.seed;
  meta.best_epoch = report.best_epoch;
  meta.val_crmse_deg = report.best_val_crmse_deg;
  gyro::save_checkpoint(a.checkpoint_path, model, meta);
  gyro::write_train_report_csv(a.report_path, report);
  std::printf("trained %d epochs, best validation CRMSE %.4f deg at epoch %d (%.1f s)\n",
              static_cast<int>(report.val_crmse_deg.size()), report.best_val_crmse_deg,
              report.best_epoch, report.wall_time_s);
  return 0;
}

// ---------------------------------------------------------------- evaluate / compare

struct EvaluateArgs {
  std::string dataset_dir;
  std::string checkpoint_path;
  std::string out_dir = ".";
  std::string recordings_override;
  std::vector<double> windows_s;  // empty: use manifest windows
  bool full_compare = false;
};

int run_evaluate(const EvaluateArgs& a) {
  require_file(a.dataset_dir + "/manifest.json");
  require_file(a.checkpoint_path);
  const gyro::LoadedDataset data = gyro::load_dataset(a.dataset_dir);
  const gyro::LoadedCheckpoint ckpt = gyro::load_checkpoint(a.checkpoint_path);
  const std::string rec_dir =
      a.recordings_override.empty() ? data.manifest.recordings_dir : a.recordings_override;
  const std::vector<gyro::ImuRecording> test =
      load_recordings_by_id(rec_dir, data.manifest.test_ids);
  const std::vector<double> windows = a.windows_s.empty() ? data.manifest.windows_s : a.windows_s;

  std::filesystem::create_directories(a.out_dir);
  const gyro::BatchEvaluation ev =
      gyro::evaluate_batch(test, ckpt.model, windows, data.manifest.model_rate_hz);
  gyro::write_comparison_csv(a.out_dir + "/comparison.csv", ev.comparison);
  gyro::write_boxplot_csv(a.out_dir + "/boxplot.csv", ev.boxplot);

  if (a.full_compare) {
    const std::vector<double> grid = gyro::default_time_accuracy_windows(
        data.manifest.model_rate_hz, test.front().duration_s());
    const gyro::TimeToAccuracyTable tta =
        gyro::time_to_accuracy(test, ckpt.model, data.manifest.model_rate_hz,
                               gyro::kDefaultAccuracyThresholdsDeg, grid);
    gyro::write_time_to_accuracy_csv(a.out_dir + "/time_to_accuracy.csv", tta);
    gyro::write_median_curve_csv(a.out_dir + "/median_curve.csv", tta);
    const gyro::SingleRunTrace trace =
        gyro::single_run_trace(test.front(), ckpt.model, windows, data.manifest.model_rate_hz);
    gyro::write_single_run_trace_csv(a.out_dir + "/single_run_trace.csv", trace);
  }
  std::printf("evaluation reports written to %s\n", a.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary gyrocompassing: simulation, noise identification, "
               "learned heading estimation, evaluation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate stationary IMU recordings");
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
  c_sim->add_option("--count", sim.count, "Number of recordings");
  c_sim->add_option("--seed", sim.seed, "Master seed");
  c_sim->add_option("--preset", sim.preset, "Sensor preset: clean|datasheet|empirical|drifting");
  c_sim->add_option("--duration", sim.duration_s, "Recording length, seconds");
  c_sim->add_option("--rate", sim.rate_hz, "Sample rate, Hz");
  c_sim->add_option("--lat", sim.lat_deg, "Latitude, degrees");
  c_sim->add_option("--lon", sim.lon_deg, "Longitude, degrees");
  c_sim->add_option("--roll", sim.roll_deg, "True roll, degrees");
  c_sim->add_option("--pitch", sim.pitch_deg, "True pitch, degrees");
  double yaw_opt = 0.0;
  CLI::Option* yaw_flag = c_sim->add_option("--yaw", yaw_opt, "Fixed true yaw, degrees (default: random)");
  double arw_o, bi_o, rrw_o, tau_o, br_o, and_o, ab_o;
  CLI::Option* o_arw = c_sim->add_option("--arw", arw_o, "Override ARW, deg/sqrt(hr)");
  CLI::Option* o_bi = c_sim->add_option("--bias-instability", bi_o, "Override BI, deg/hr");
  CLI::Option* o_rrw = c_sim->add_option("--rrw", rrw_o, "Override RRW, deg/hr/sqrt(hr)");
  CLI::Option* o_tau = c_sim->add_option("--gm-tau", tau_o, "Override GM correlation time, s");
  CLI::Option* o_br = c_sim->add_option("--bias-range", br_o, "Override turn-on bias range, deg/hr");
  CLI::Option* o_and = c_sim->add_option("--accel-noise", and_o, "Override accel noise, mg/sqrt(Hz)");
  CLI::Option* o_ab = c_sim->add_option("--accel-bias", ab_o, "Override accel bias range, mg");

  std::string al_input, al_curve = "allan.csv", al_params = "noise_params.json";
  CLI::App* c_allan = app.add_subcommand("allan", "Allan deviation and noise identification");
  c_allan->add_option("--input", al_input, "Recording CSV")->required();
  c_allan->add_option("--out-curve", al_curve, "Allan curve CSV path");
  c_allan->add_option("--out-params", al_params, "Identified parameters JSON path");

  DatasetArgs ds;
  CLI::App* c_ds = app.add_subcommand("dataset", "Window, augment and split recordings");
  c_ds->add_option("--recordings", ds.recordings_dir, "Recordings directory")->required();
  c_ds->add_option("--out", ds.out_dir, "Dataset output directory")->required();
  c_ds->add_option("--model-rate", ds.model_rate_hz, "Model input rate, Hz");
  c_ds->add_option("--windows", ds.windows_s, "Window lengths, seconds")->delimiter(',');
  c_ds->add_option("--split-seed", ds.split_seed, "Recording shuffle seed");
  c_ds->add_option("--augment-seed", ds.augment_seed, "Augmentation noise seed");
  c_ds->add_flag("--augment", ds.augment, "Rotate train/validation samples over the heading grid");
  c_ds->add_option("--psi-min", ds.augment_cfg.psi_min_deg, "Grid start, degrees");
  c_ds->add_option("--psi-max", ds.augment_cfg.psi_max_deg, "Grid end, degrees");
  c_ds->add_option("--delta-psi", ds.augment_cfg.delta_psi_deg, "Grid step, degrees");
  c_ds->add_option("--awgn-std", ds.augment_cfg.awgn_std_deg_hr, "Added white noise, deg/hr");
  c_ds->add_option("--aug-bias-range", ds.augment_cfg.bias_range_deg_hr,
                   "Added constant bias range, deg/hr");

  TrainArgs tr;
  CLI::App* c_tr = app.add_subcommand("train", "Train the heading regressor");
  c_tr->add_option("--dataset", tr.dataset_dir, "Dataset directory")->required();
  c_tr->add_option("--checkpoint", tr.checkpoint_path, "Checkpoint output path");
  c_tr->add_option("--report", tr.report_path, "Training report CSV path");
  c_tr->add_option("--layers", tr.layers, "LSTM layers");
  c_tr->add_option("--hidden", tr.hidden, "Hidden units per direction");
  c_tr->add_option("--epochs", tr.cfg.epochs, "Training epochs");
  c_tr->add_option("--batch", tr.cfg.batch_size, "Mini-batch size");
  c_tr->add_option("--lr", tr.cfg.learning_rate, "Learning rate");
  std::string opt_name = "adam";
  c_tr->add_option("--optimizer", opt_name, "adam|sgd");
  c_tr->add_option("--init-seed", tr.init_seed, "Weight init seed");
  c_tr->add_option("--train-seed", tr.cfg.seed, "Batch shuffle seed");
  int patience = 0;
  CLI::Option* pat_flag = c_tr->add_option("--patience", patience, "Early-stop patience, epochs");

  EvaluateArgs ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "Compare model vs baseline on the test split");
  CLI::App* c_cmp = app.add_subcommand("compare",
                                       "Full comparison: tables, boxplots, time-to-accuracy, trace");
  for (CLI::App* c : {c_ev, c_cmp}) {
    c->add_option("--dataset", ev.dataset_dir, "Dataset directory")->required();
    c->add_option("--checkpoint", ev.checkpoint_path, "Trained checkpoint")->required();
    c->add_option("--out-dir", ev.out_dir, "Report output directory");
    c->add_option("--recordings", ev.recordings_override, "Recordings directory override");
    c->add_option("--windows", ev.windows_s, "Windows, seconds")->delimiter(',');
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (c_sim->parsed()) {
      if (yaw_flag->count()) sim.yaw_deg = yaw_opt;
      if (o_arw->count()) sim.arw = arw_o;
      if (o_bi->count()) sim.bi = bi_o;
      if (o_rrw->count()) sim.rrw = rrw_o;
      if (o_tau->count()) sim.tau = tau_o;
      if (o_br->count()) sim.bias_range = br_o;
      if (o_and->count()) sim.accel_nd = and_o;
      if (o_ab->count()) sim.accel_bias = ab_o;
      return run_simulate(sim);
    }
    if (c_allan->parsed()) return run_allan(al_input, al_curve, al_params);
    if (c_ds->parsed()) return run_dataset(ds);
    if (c_tr->parsed()) {
      if (opt_name == "adam") tr.cfg.optimizer = gyro::Optimizer::adam;
      else if (opt_name == "sgd") tr.cfg.optimizer = gyro::Optimizer::sgd;
      else fail(kExitUsage, "usage", "unknown optimizer '" + opt_name + "'");
      if (pat_flag->count()) tr.cfg.patience = patience;
      return run_train(tr);
    }
    if (c_ev->parsed() || c_cmp->parsed()) {
      ev.full_compare = c_cmp->parsed();
      return run_evaluate(ev);
    }
  } catch (const gyro::Error& e) {
    switch (e.code()) {
      case gyro::Errc::parse:
        fail(kExitData, "malformed-data", e.what());
      case gyro::Errc::invalid_input:
      case gyro::Errc::degenerate:
        fail(kExitData, "invalid-input", e.what());
      case gyro::Errc::training_diverged:
        fail(kExitInternal, "training-diverged", e.what());
    }
    fail(kExitInternal, "internal", e.what());
  } catch (const std::exception& e) {
    fail(kExitInternal, "internal", e.what());
  }
  fail(kExitUsage, "usage", "no subcommand selected");
}
