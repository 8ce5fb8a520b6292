#include "gyrocompass/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "gyrocompass/error.hpp"
#include "gyrocompass/frames.hpp"
#include "gyrocompass/textio.hpp"

namespace gyro {

namespace {

constexpr const char* kRecordingMagic = "# gyrocompass-recording v1";
constexpr const char* kRecordingColumns = "t_s,gx,gy,gz,ax,ay,az";
constexpr const char* kSamplesMagic = "# gyrocompass-samples v1";
constexpr const char* kSamplesColumns =
    "sample_id,split,source_id,window_s,label_deg,step_idx,gx_deg_hr,gy_deg_hr,gz_deg_hr";

std::string fmt_compact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t parse_u64(const std::string& text, const std::string& path, long line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw parse_error(path, line, "expected an unsigned integer, got '" + text + "'");
  return v;
}

}  // namespace

void save_recording(const ImuRecording& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("save_recording: cannot open '" + path + "' for writing");
  const SensorSpec& s = rec.spec;
  out << kRecordingMagic << "\n";
  out << "# sample_rate=" << fmt_g17(rec.sample_rate) << "\n";
  out << "# n_samples=" << rec.size() << "\n";
  out << "# truth_euler_deg=" << fmt_g17(rec.truth.roll * kDegPerRad) << ","
      << fmt_g17(rec.truth.pitch * kDegPerRad) << "," << fmt_g17(rec.truth.yaw * kDegPerRad)
      << "\n";
  out << "# lat_deg=" << fmt_g17(rec.geo.latitude * kDegPerRad) << "\n";
  out << "# lon_deg=" << fmt_g17(rec.geo.longitude * kDegPerRad) << "\n";
  out << "# seed=" << rec.seed << "\n";
  out << "# arw_deg_rthr=" << fmt_g17(s.arw) << "\n";
  out << "# bias_instability_deg_hr=" << fmt_g17(s.bias_instability) << "\n";
  out << "# rrw_deg_hr_rthr=" << fmt_g17(s.rrw) << "\n";
  out << "# gm_correlation_time_s=" << fmt_g17(s.gm_correlation_time) << "\n";
  out << "# initial_bias_range_deg_hr=" << fmt_g17(s.initial_bias_range) << "\n";
  out << "# scale_factor_error=";
  for (int i = 0; i < 9; ++i) out << (i ? "," : "") << fmt_g17(s.scale_factor_error[static_cast<std::size_t>(i)]);
  out << "\n";
  out << "# accel_noise_density_mg_rthz=" << fmt_g17(s.accel_noise_density) << "\n";
  out << "# accel_bias_range_mg=" << fmt_g17(s.accel_bias_range) << "\n";
  out << kRecordingColumns << "\n";
  const double dt = 1.0 / rec.sample_rate;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    out << fmt_g17(static_cast<double>(k) * dt);
    for (std::size_t i = 0; i < 3; ++i) out << ',' << fmt_g17(rec.gyro[k][i]);
    for (std::size_t i = 0; i < 3; ++i) out << ',' << fmt_g17(rec.accel[k][i]);
    out << '\n';
  }
  if (!out) throw invalid_input("save_recording: write failed for '" + path + "'");
}

ImuRecording load_recording(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open recording");

  std::string line;
  long lineno = 0;
  if (!std::getline(in, line) || line != kRecordingMagic)
    throw parse_error(path, 1, "not a gyrocompass recording (bad magic line)");
  ++lineno;

  std::map<std::string, std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# ", 0) == 0) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw parse_error(path, lineno, "malformed header line");
      header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    break;  // first non-header line must be the column header
  }
  if (line != kRecordingColumns)
    throw parse_error(path, lineno, "expected column header '" + std::string(kRecordingColumns) + "'");

  auto field = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw parse_error(path, lineno, std::string("missing header key ") + key);
    return it->second;
  };

  ImuRecording rec;
  rec.sample_rate = parse_double(field("sample_rate"), path, lineno);
  const auto n = static_cast<std::size_t>(parse_u64(field("n_samples"), path, lineno));
  {
    const auto parts = split_csv(field("truth_euler_deg"));
    if (parts.size() != 3) throw parse_error(path, lineno, "truth_euler_deg needs 3 values");
    rec.truth.roll = parse_double(parts[0], path, lineno) * kRadPerDeg;
    rec.truth.pitch = parse_double(parts[1], path, lineno) * kRadPerDeg;
    rec.truth.yaw = parse_double(parts[2], path, lineno) * kRadPerDeg;
  }
  rec.geo.latitude = parse_double(field("lat_deg"), path, lineno) * kRadPerDeg;
  rec.geo.longitude = parse_double(field("lon_deg"), path, lineno) * kRadPerDeg;
  rec.seed = parse_u64(field("seed"), path, lineno);
  SensorSpec& s = rec.spec;
  s.sample_rate = rec.sample_rate;
  s.arw = parse_double(field("arw_deg_rthr"), path, lineno);
  s.bias_instability = parse_double(field("bias_instability_deg_hr"), path, lineno);
  s.rrw = parse_double(field("rrw_deg_hr_rthr"), path, lineno);
  s.gm_correlation_time = parse_double(field("gm_correlation_time_s"), path, lineno);
  s.initial_bias_range = parse_double(field("initial_bias_range_deg_hr"), path, lineno);
  {
    const auto parts = split_csv(field("scale_factor_error"));
    if (parts.size() != 9) throw parse_error(path, lineno, "scale_factor_error needs 9 values");
    for (std::size_t i = 0; i < 9; ++i)
      s.scale_factor_error[i] = parse_double(parts[i], path, lineno);
  }
  s.accel_noise_density = parse_double(field("accel_noise_density_mg_rthz"), path, lineno);
  s.accel_bias_range = parse_double(field("accel_bias_range_mg"), path, lineno);

  rec.gyro.resize(n);
  rec.accel.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::getline(in, line))
      throw parse_error(path, lineno, "truncated: expected " + std::to_string(n) + " rows, got " +
                                          std::to_string(k));
    ++lineno;
    const auto parts = split_csv(line);
    if (parts.size() != 7) throw parse_error(path, lineno, "expected 7 comma-separated fields");
    for (std::size_t i = 0; i < 3; ++i) {
      rec.gyro[k][i] = parse_double(parts[i + 1], path, lineno);
      rec.accel[k][i] = parse_double(parts[i + 4], path, lineno);
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty()) throw parse_error(path, lineno, "trailing content after data rows");
  }
  return rec;
}

Sample make_sample(const ImuRecording& rec, double window_s, double model_rate_hz,
                   const std::string& source_id) {
  if (!(model_rate_hz > 0.0)) throw invalid_input("make_sample: model rate must be positive");
  const double ratio = rec.sample_rate / model_rate_hz;
  const auto block = static_cast<std::size_t>(std::llround(ratio));
  if (block < 1 || std::fabs(ratio - static_cast<double>(block)) > 1e-9 * ratio)
    throw invalid_input("make_sample: recording rate not an integer multiple of model rate");
  const double steps_f = window_s * model_rate_hz;
  const auto steps = static_cast<std::size_t>(std::llround(steps_f));
  if (steps < 1 || std::fabs(steps_f - static_cast<double>(steps)) > 1e-9)
    throw invalid_input("make_sample: window does not hold a whole number of model steps");
  if (steps * block > rec.size()) throw invalid_input("make_sample: window longer than recording");

  Sample s;
  s.source_id = source_id;
  s.id = (source_id.empty() ? std::string("sample") : source_id) + "_w" + fmt_compact(window_s);
  s.window_s = window_s;
  s.label_deg = wrap_deg(rec.truth.yaw * kDegPerRad);
  s.seq.resize(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    Vec3 acc{};
    for (std::size_t k = j * block; k < (j + 1) * block; ++k)
      for (std::size_t i = 0; i < 3; ++i) acc[i] += rec.gyro[k][i];
    for (std::size_t i = 0; i < 3; ++i)
      s.seq[j][i] = rad_s_to_deg_hr(acc[i] / static_cast<double>(block));
  }
  return s;
}

std::vector<double> AugmentConfig::grid() const {
  std::vector<double> psis;
  for (double psi = psi_min_deg; psi <= psi_max_deg + 1e-9; psi += delta_psi_deg)
    psis.push_back(psi);
  return psis;
}

std::vector<Sample> augment(const std::vector<Sample>& samples, const AugmentConfig& cfg,
                            std::uint64_t seed) {
  if (!cfg.valid()) throw invalid_input("augment: invalid augmentation config");
  if (samples.empty()) throw invalid_input("augment: no samples to augment");

  const std::vector<double> psis = cfg.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Sample> out;
  out.reserve(samples.size() * psis.size());
  for (const Sample& base : samples) {
    for (const double psi : psis) {
      Sample aug;
      aug.source_id = base.source_id;
      aug.id = base.id + "_a" + fmt_compact(psi);
      aug.window_s = base.window_s;
      aug.label_deg = wrap_deg(base.label_deg + psi);
      aug.seq.resize(base.seq.size());

      const double c = std::cos(psi * kRadPerDeg);
      const double sn = std::sin(psi * kRadPerDeg);
      Vec3 bias{};
      if (cfg.bias_range_deg_hr > 0.0)
        for (auto& v : bias) v = cfg.bias_range_deg_hr * uni(rng);
      for (std::size_t t = 0; t < base.seq.size(); ++t) {
        const Vec3& v = base.seq[t];
        Vec3 rotated{c * v[0] + sn * v[1], -sn * v[0] + c * v[1], v[2]};
        for (std::size_t i = 0; i < 3; ++i) {
          double noise = (cfg.awgn_std_deg_hr > 0.0) ? cfg.awgn_std_deg_hr * gauss(rng) : 0.0;
          aug.seq[t][i] = rotated[i] + noise + bias[i];
        }
      }
      out.push_back(std::move(aug));
    }
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<std::vector<Sample>>& samples_by_recording,
                           const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = samples_by_recording.size();
  if (n < 10) throw invalid_input("split_dataset: need at least 10 recordings");
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0) ||
      std::fabs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw invalid_input("split_dataset: ratios must be positive and sum to 1");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& group = samples_by_recording[i];
    if (group.empty()) throw invalid_input("split_dataset: empty recording group");
    for (const Sample& s : group)
      if (s.source_id != group.front().source_id)
        throw invalid_input("split_dataset: mixed source ids within a group");
    if (!seen.insert(group.front().source_id).second)
      throw invalid_input("split_dataset: duplicate source id '" + group.front().source_id + "'");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples_by_recording[a].front().source_id < samples_by_recording[b].front().source_id;
  });
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_val =
      static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n)));
  if (n_train < 1 || n_val < 1 || n_train + n_val >= n)
    throw invalid_input("split_dataset: too few recordings to honor the ratios");

  DatasetSplit split;
  split.split_seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = (i < n_train) ? split.train
                : (i < n_train + n_val) ? split.validation
                                        : split.test;
    for (const Sample& s : samples_by_recording[order[i]]) dst.push_back(s);
  }
  return split;
}

namespace {

void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples,
                       const char* split_name) {
  for (const Sample& s : samples) {
    for (std::size_t t = 0; t < s.seq.size(); ++t) {
      out << s.id << ',' << split_name << ',' << s.source_id << ',' << fmt_g17(s.window_s) << ','
          << fmt_g17(s.label_deg) << ',' << t;
      for (std::size_t i = 0; i < 3; ++i) out << ',' << fmt_g17(s.seq[t][i]);
      out << '\n';
    }
  }
}

}  // namespace

void save_dataset(const std::string& dir, const DatasetManifest& manifest,
                  const DatasetSplit& split) {
  std::filesystem::create_directories(dir);

  nlohmann::json j;
  j["format"] = "gyrocompass-dataset";
  j["version"] = 1;
  j["model_rate_hz"] = manifest.model_rate_hz;
  j["windows_s"] = manifest.windows_s;
  j["split_seed"] = manifest.split_seed;
  j["augment_seed"] = manifest.augment_seed;
  j["augmented"] = manifest.augmented;
  j["augment"] = {{"psi_min_deg", manifest.augment_cfg.psi_min_deg},
                  {"psi_max_deg", manifest.augment_cfg.psi_max_deg},
                  {"delta_psi_deg", manifest.augment_cfg.delta_psi_deg},
                  {"awgn_std_deg_hr", manifest.augment_cfg.awgn_std_deg_hr},
                  {"bias_range_deg_hr", manifest.augment_cfg.bias_range_deg_hr}};
  j["normalization"] = {{"sequence_units", "deg_per_hr"}};
  j["splits"] = {{"train", manifest.train_ids},
                 {"validation", manifest.validation_ids},
                 {"test", manifest.test_ids}};
  j["recordings_dir"] = manifest.recordings_dir;
  j["samples_file"] = "samples.csv";

  const std::string manifest_path = dir + "/manifest.json";
  std::ofstream mj(manifest_path);
  if (!mj) throw invalid_input("save_dataset: cannot write '" + manifest_path + "'");
  mj << j.dump(2) << "\n";

  const std::string samples_path = dir + "/samples.csv";
  std::ofstream sc(samples_path);
  if (!sc) throw invalid_input("save_dataset: cannot write '" + samples_path + "'");
  sc << kSamplesMagic << "\n";
  sc << "# model_rate_hz=" << fmt_g17(manifest.model_rate_hz) << "\n";
  sc << kSamplesColumns << "\n";
  write_samples_csv(sc, split.train, "train");
  write_samples_csv(sc, split.validation, "validation");
  write_samples_csv(sc, split.test, "test");
  if (!sc) throw invalid_input("save_dataset: write failed for '" + samples_path + "'");
}

LoadedDataset load_dataset(const std::string& dir) {
  LoadedDataset out;
  const std::string manifest_path = dir + "/manifest.json";
  std::ifstream mj(manifest_path);
  if (!mj) throw parse_error(manifest_path, 0, "cannot open manifest");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(mj);
    DatasetManifest& m = out.manifest;
    if (j.at("format") != "gyrocompass-dataset")
      throw parse_error(manifest_path, 0, "not a dataset manifest");
    m.model_rate_hz = j.at("model_rate_hz").get<double>();
    m.windows_s = j.at("windows_s").get<std::vector<double>>();
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    m.augment_seed = j.at("augment_seed").get<std::uint64_t>();
    m.augmented = j.at("augmented").get<bool>();
    const auto& a = j.at("augment");
    m.augment_cfg.psi_min_deg = a.at("psi_min_deg").get<double>();
    m.augment_cfg.psi_max_deg = a.at("psi_max_deg").get<double>();
    m.augment_cfg.delta_psi_deg = a.at("delta_psi_deg").get<double>();
    m.augment_cfg.awgn_std_deg_hr = a.at("awgn_std_deg_hr").get<double>();
    m.augment_cfg.bias_range_deg_hr = a.at("bias_range_deg_hr").get<double>();
    const auto& sp = j.at("splits");
    m.train_ids = sp.at("train").get<std::vector<std::string>>();
    m.validation_ids = sp.at("validation").get<std::vector<std::string>>();
    m.test_ids = sp.at("test").get<std::vector<std::string>>();
    m.recordings_dir = j.at("recordings_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(manifest_path, 0, std::string("malformed manifest: ") + e.what());
  }

  const std::string samples_path = dir + "/samples.csv";
  std::ifstream sc(samples_path);
  if (!sc) throw parse_error(samples_path, 0, "cannot open samples file");
  std::string line;
  long lineno = 0;
  if (!std::getline(sc, line) || line != kSamplesMagic)
    throw parse_error(samples_path, 1, "not a gyrocompass samples file");
  ++lineno;
  if (!std::getline(sc, line) || line.rfind("# model_rate_hz=", 0) != 0)
    throw parse_error(samples_path, 2, "missing model_rate_hz header");
  ++lineno;
  if (!std::getline(sc, line) || line != kSamplesColumns)
    throw parse_error(samples_path, 3, "unexpected column header");
  ++lineno;

  out.split.split_seed = out.manifest.split_seed;
  Sample current;
  std::string current_split;
  auto flush = [&]() {
    if (current.id.empty()) return;
    auto& dst = (current_split == "train")        ? out.split.train
                : (current_split == "validation") ? out.split.validation
                                                  : out.split.test;
    dst.push_back(std::move(current));
    current = Sample{};
  };
  while (std::getline(sc, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split_csv(line);
    if (parts.size() != 9) throw parse_error(samples_path, lineno, "expected 9 fields");
    const std::string& id = parts[0];
    const std::string& split_name = parts[1];
    if (split_name != "train" && split_name != "validation" && split_name != "test")
      throw parse_error(samples_path, lineno, "unknown split '" + split_name + "'");
    if (id != current.id) {
      flush();
      current.id = id;
      current.source_id = parts[2];
      current.window_s = parse_double(parts[3], samples_path, lineno);
      current.label_deg = parse_double(parts[4], samples_path, lineno);
      current_split = split_name;
    }
    const auto step = static_cast<std::size_t>(parse_u64(parts[5], samples_path, lineno));
    if (step != current.seq.size())
      throw parse_error(samples_path, lineno, "non-contiguous step index");
    Vec3 v{};
    for (std::size_t i = 0; i < 3; ++i) v[i] = parse_double(parts[6 + i], samples_path, lineno);
    current.seq.push_back(v);
  }
  flush();
  return out;
}

}  // namespace gyro
