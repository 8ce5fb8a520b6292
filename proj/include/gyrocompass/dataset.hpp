#pragma once

// Dataset construction: recording persistence, windowing plus block-mean
// downsampling into model-ready sequences, planar-rotation augmentation, and
// recording-granularity train/validation/test splits.

#include <cstdint>
#include <string>
#include <vector>

#include "gyrocompass/sensor_sim.hpp"

namespace gyro {

// One model-ready sequence: gyro rates in deg/hr at the model rate, labeled
// with the true heading.
struct Sample {
  std::string id;
  std::string source_id;   // recording the sample derives from
  double window_s = 0.0;
  double label_deg = 0.0;  // [0, 360)
  std::vector<Vec3> seq;   // deg/hr
};

struct AugmentConfig {
  double psi_min_deg = 0.0;
  double psi_max_deg = 355.0;
  double delta_psi_deg = 5.0;
  double awgn_std_deg_hr = 0.0;
  double bias_range_deg_hr = 1.0;  // uniform half-width per axis

  bool valid() const {
    return delta_psi_deg > 0.0 && psi_max_deg >= psi_min_deg && awgn_std_deg_hr >= 0.0 &&
           bias_range_deg_hr >= 0.0;
  }
  std::vector<double> grid() const;  // psi_min : delta : psi_max, inclusive
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  std::vector<Sample> train, validation, test;
  std::uint64_t split_seed = 0;
};

// Recording file: '#' key=value header block followed by
// t_s,gx,gy,gz,ax,ay,az rows in SI units. Lossless round trip.
void save_recording(const ImuRecording& rec, const std::string& path);
ImuRecording load_recording(const std::string& path);

// Block-mean downsample the first window_s seconds from the recording rate to
// model_rate (the rate ratio must be an integer) and convert to deg/hr.
Sample make_sample(const ImuRecording& rec, double window_s, double model_rate_hz,
                   const std::string& source_id = {});

// Algorithm: for every grid angle, rotate the planar components by psi_i, add
// white noise, add one constant per-axis uniform bias draw, shift the label by
// psi_i. Output size = |samples| * |grid|.
std::vector<Sample> augment(const std::vector<Sample>& samples, const AugmentConfig& cfg,
                            std::uint64_t seed);

// Split whole recordings (never individual samples) 70:10:20 by default.
// Requires at least 10 recordings.
DatasetSplit split_dataset(const std::vector<std::vector<Sample>>& samples_by_recording,
                           const SplitRatios& ratios, std::uint64_t seed);

// On-disk dataset bundle: manifest.json plus samples.csv inside a directory.
struct DatasetManifest {
  double model_rate_hz = 1.0;
  std::vector<double> windows_s;
  std::uint64_t split_seed = 0;
  std::uint64_t augment_seed = 0;
  bool augmented = false;
  AugmentConfig augment_cfg;
  std::vector<std::string> train_ids, validation_ids, test_ids;  // recording ids
  std::string recordings_dir;  // provenance for evaluation-time re-windowing
};

void save_dataset(const std::string& dir, const DatasetManifest& manifest,
                  const DatasetSplit& split);

struct LoadedDataset {
  DatasetManifest manifest;
  DatasetSplit split;
};
LoadedDataset load_dataset(const std::string& dir);

}  // namespace gyro
