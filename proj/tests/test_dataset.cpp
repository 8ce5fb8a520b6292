#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "gyrocompass/align.hpp"
#include "gyrocompass/dataset.hpp"
#include "gyrocompass/error.hpp"

using namespace gyro;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a gyro::Error");
  return Errc::invalid_input;
}

// heading of the mean sequence vector; atan2 ignores the deg/hr scaling
double sample_heading_deg(const Sample& s) {
  Vec3 mean{};
  for (const Vec3& v : s.seq)
    for (std::size_t i = 0; i < 3; ++i) mean[i] += v[i];
  return heading_simplified_deg(mean);
}

const char* kGoodHeader =
    "# gyrocompass-recording v1\n"
    "# sample_rate=2\n"
    "# n_samples=2\n"
    "# truth_euler_deg=0,0,90\n"
    "# lat_deg=30\n"
    "# lon_deg=0\n"
    "# seed=7\n"
    "# arw_deg_rthr=0\n"
    "# bias_instability_deg_hr=0\n"
    "# rrw_deg_hr_rthr=0\n"
    "# gm_correlation_time_s=250\n"
    "# initial_bias_range_deg_hr=0\n"
    "# scale_factor_error=0,0,0,0,0,0,0,0,0\n"
    "# accel_noise_density_mg_rthz=0\n"
    "# accel_bias_range_mg=0\n";
const char* kGoodColumns = "t_s,gx,gy,gz,ax,ay,az\n";
const char* kRow0 = "0,1e-05,0,0,0,0,-9.8\n";
const char* kRow1 = "0.5,1e-05,0,0,0,0,-9.8\n";

}  // namespace

TEST_CASE("recording files round trip losslessly") {
  const fs::path dir = fresh_dir("gyro_test_rec_roundtrip");
  const EulerAngles truth{3.0 * kRadPerDeg, -4.0 * kRadPerDeg, 123.456 * kRadPerDeg};
  const GeoLocation geo{32.76 * kRadPerDeg, -117.2 * kRadPerDeg};
  const ImuRecording rec = simulate_stationary(spec_drifting(50.0), truth, geo, 1.5, 42);
  const std::string path = (dir / "rec.csv").string();
  save_recording(rec, path);
  const ImuRecording back = load_recording(path);

  REQUIRE(back.size() == rec.size());
  for (std::size_t k = 0; k < rec.size(); ++k)
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back.gyro[k][i] == rec.gyro[k][i]);
      CHECK(back.accel[k][i] == rec.accel[k][i]);
    }
  CHECK(back.sample_rate == rec.sample_rate);
  CHECK(back.seed == rec.seed);
  // angles pass through a degree conversion, so allow conversion roundoff
  CHECK(back.truth.roll == doctest::Approx(rec.truth.roll).epsilon(1e-14));
  CHECK(back.truth.pitch == doctest::Approx(rec.truth.pitch).epsilon(1e-14));
  CHECK(back.truth.yaw == doctest::Approx(rec.truth.yaw).epsilon(1e-14));
  CHECK(back.geo.latitude == doctest::Approx(rec.geo.latitude).epsilon(1e-14));
  CHECK(back.geo.longitude == doctest::Approx(rec.geo.longitude).epsilon(1e-14));
  CHECK(back.spec.arw == rec.spec.arw);
  CHECK(back.spec.bias_instability == rec.spec.bias_instability);
  CHECK(back.spec.rrw == rec.spec.rrw);
  CHECK(back.spec.gm_correlation_time == rec.spec.gm_correlation_time);
  CHECK(back.spec.initial_bias_range == rec.spec.initial_bias_range);
  CHECK(back.spec.accel_noise_density == rec.spec.accel_noise_density);
  CHECK(back.spec.accel_bias_range == rec.spec.accel_bias_range);
  CHECK(back.spec.sample_rate == rec.sample_rate);
}

TEST_CASE("malformed recording files fail with parse errors naming the line") {
  const fs::path dir = fresh_dir("gyro_test_rec_parse");
  const std::string good = std::string(kGoodHeader) + kGoodColumns + kRow0 + kRow1;

  const auto expect_parse = [&](const char* name, const std::string& content,
                                const std::string& needle) {
    const fs::path p = dir / name;
    spit(p, content);
    try {
      load_recording(p.string());
      FAIL("expected a parse error for " << name);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::parse);
      CHECK(std::string(e.what()).find(p.string()) != std::string::npos);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  spit(dir / "good.csv", good);
  CHECK_NOTHROW(load_recording((dir / "good.csv").string()));

  expect_parse("magic.csv", "# not a recording\n" + good.substr(good.find('\n') + 1), ":1:");
  expect_parse("columns.csv", std::string(kGoodHeader) + "t,gx\n" + kRow0 + kRow1, "column");
  expect_parse("trunc.csv", std::string(kGoodHeader) + kGoodColumns + kRow0, "truncated");
  expect_parse("trailing.csv", good + "stray\n", "trailing");
  expect_parse("badnum.csv",
               std::string(kGoodHeader) + kGoodColumns + "0,xx,0,0,0,0,-9.8\n" + kRow1, ":17:");
  expect_parse("missingkey.csv",
               [&] {
                 std::string s = good;
                 const auto pos = s.find("# seed=7\n");
                 s.erase(pos, std::string("# seed=7\n").size());
                 return s;
               }(),
               "seed");
  expect_parse("fields.csv",
               std::string(kGoodHeader) + kGoodColumns + "0,1e-05,0,0,0,0\n" + kRow1, "7");
  CHECK(code_of([&] { load_recording((dir / "nope.csv").string()); }) == Errc::parse);
}

TEST_CASE("make_sample block-averages into model steps in deg/hr") {
  ImuRecording rec;
  rec.sample_rate = 4.0;
  rec.truth.yaw = 370.0 * kRadPerDeg;
  rec.gyro.resize(8);
  rec.accel.resize(8);
  for (std::size_t k = 0; k < 8; ++k) {
    rec.gyro[k] = {static_cast<double>(k) * 1e-5, 1e-5, (k % 2 == 0) ? 2e-5 : -2e-5};
  }
  const Sample s = make_sample(rec, 2.0, 1.0, "rec_007");
  CHECK(s.id == "rec_007_w2");
  CHECK(s.source_id == "rec_007");
  CHECK(s.window_s == 2.0);
  CHECK(s.label_deg == doctest::Approx(10.0).epsilon(1e-12));
  REQUIRE(s.seq.size() == 2);
  CHECK(s.seq[0][0] == doctest::Approx(rad_s_to_deg_hr(1.5e-5)).epsilon(1e-14));
  CHECK(s.seq[1][0] == doctest::Approx(rad_s_to_deg_hr(5.5e-5)).epsilon(1e-14));
  CHECK(s.seq[0][1] == doctest::Approx(rad_s_to_deg_hr(1e-5)).epsilon(1e-14));
  CHECK(s.seq[0][2] == doctest::Approx(0.0));
  CHECK(make_sample(rec, 1.0, 2.0).id == "sample_w1");
}

TEST_CASE("make_sample rejects incompatible rates and windows") {
  ImuRecording rec;
  rec.sample_rate = 5.0;
  rec.gyro.resize(10);
  rec.accel.resize(10);
  CHECK_THROWS_AS(make_sample(rec, 1.0, 2.0), Error);  // 5/2 is not an integer
  rec.sample_rate = 4.0;
  CHECK_THROWS_AS(make_sample(rec, 1.3, 1.0), Error);  // fractional model steps
  CHECK_THROWS_AS(make_sample(rec, 4.0, 1.0), Error);  // longer than the recording
  CHECK_THROWS_AS(make_sample(rec, 1.0, 0.0), Error);
  CHECK_NOTHROW(make_sample(rec, 2.0, 1.0));
}

TEST_CASE("augmentation grid is inclusive of both ends") {
  AugmentConfig cfg;
  CHECK(cfg.grid().size() == 72);  // 0:5:355
  cfg.psi_min_deg = 0.0;
  cfg.psi_max_deg = 315.0;
  cfg.delta_psi_deg = 45.0;
  const std::vector<double> g = cfg.grid();
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 315.0);
  cfg.psi_max_deg = 12.0;
  cfg.delta_psi_deg = 5.0;
  CHECK(cfg.grid().size() == 3);  // 0, 5, 10
  cfg.delta_psi_deg = 0.0;
  CHECK_FALSE(cfg.valid());
}

TEST_CASE("noise-free augmentation rotates the heading by exactly the grid angle") {
  const EulerAngles truth{0.0, 0.0, 77.0 * kRadPerDeg};
  const GeoLocation geo{32.76 * kRadPerDeg, 0.0};
  const ImuRecording rec = simulate_stationary(spec_clean(10.0), truth, geo, 20.0, 6);
  const Sample base = make_sample(rec, 20.0, 0.5, "rec_000");
  CHECK(sample_heading_deg(base) == doctest::Approx(77.0).epsilon(1e-12));

  AugmentConfig cfg;  // 72-angle grid
  cfg.awgn_std_deg_hr = 0.0;
  cfg.bias_range_deg_hr = 0.0;
  const std::vector<Sample> out = augment({base}, cfg, 123);
  const std::vector<double> grid = cfg.grid();
  REQUIRE(out.size() == 72);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double want = 77.0 + grid[i];
    CHECK(std::fabs(wrap_signed_deg(sample_heading_deg(out[i]) - want)) < 1e-9);
    CHECK(std::fabs(wrap_signed_deg(out[i].label_deg - want)) < 1e-9);
    CHECK(out[i].label_deg >= 0.0);
    CHECK(out[i].label_deg < 360.0);
    CHECK(out[i].source_id == "rec_000");
    CHECK(out[i].window_s == 20.0);
  }
  CHECK(out[0].id == "rec_000_w20_a0");
  CHECK(out[71].id == "rec_000_w20_a355");

  // with every stochastic term off, the seed cannot matter
  const std::vector<Sample> again = augment({base}, cfg, 456);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t t = 0; t < out[i].seq.size(); ++t)
      for (std::size_t j = 0; j < 3; ++j) CHECK(again[i].seq[t][j] == out[i].seq[t][j]);
}

TEST_CASE("augmentation bias is one constant draw per output sample") {
  Sample base;
  base.id = "s";
  base.source_id = "r";
  base.window_s = 3.0;
  base.label_deg = 10.0;
  base.seq = {{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};

  AugmentConfig cfg;
  cfg.psi_min_deg = 0.0;
  cfg.psi_max_deg = 0.0;  // identity rotation isolates the bias term
  cfg.delta_psi_deg = 5.0;
  cfg.awgn_std_deg_hr = 0.0;
  cfg.bias_range_deg_hr = 2.0;
  const std::vector<Sample> out = augment({base}, cfg, 9);
  REQUIRE(out.size() == 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const double b = out[0].seq[0][i] - base.seq[0][i];
    CHECK(std::fabs(b) <= 2.0);
    for (std::size_t t = 1; t < 3; ++t)
      CHECK(out[0].seq[t][i] - base.seq[t][i] == doctest::Approx(b).epsilon(1e-15));
  }

  // same seed reproduces the draws, a different seed does not
  cfg.awgn_std_deg_hr = 0.5;
  const std::vector<Sample> a = augment({base}, cfg, 11);
  const std::vector<Sample> b = augment({base}, cfg, 11);
  const std::vector<Sample> c = augment({base}, cfg, 12);
  bool identical = true, same_as_c = true;
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 3; ++i) {
      identical = identical && a[0].seq[t][i] == b[0].seq[t][i];
      same_as_c = same_as_c && a[0].seq[t][i] == c[0].seq[t][i];
    }
  CHECK(identical);
  CHECK_FALSE(same_as_c);

  CHECK_THROWS_AS(augment({}, cfg, 1), Error);
  AugmentConfig bad = cfg;
  bad.delta_psi_deg = -1.0;
  CHECK_THROWS_AS(augment({base}, bad, 1), Error);
}

TEST_CASE("splits are whole recordings with no source leakage") {
  std::vector<std::vector<Sample>> groups;
  for (int r = 0; r < 10; ++r) {
    std::vector<Sample> g;
    for (int w = 0; w < 2; ++w) {
      Sample s;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "rec_%03d", r);
      s.source_id = buf;
      s.id = std::string(buf) + "_w" + std::to_string(w);
      s.seq = {{0, 0, 0}};
      g.push_back(s);
    }
    groups.push_back(g);
  }

  const DatasetSplit split = split_dataset(groups, SplitRatios{}, 5);
  CHECK(split.split_seed == 5);
  CHECK(split.train.size() == 14);
  CHECK(split.validation.size() == 2);
  CHECK(split.test.size() == 4);

  std::set<std::string> train_src, val_src, test_src;
  for (const Sample& s : split.train) train_src.insert(s.source_id);
  for (const Sample& s : split.validation) val_src.insert(s.source_id);
  for (const Sample& s : split.test) test_src.insert(s.source_id);
  CHECK(train_src.size() == 7);
  CHECK(val_src.size() == 1);
  CHECK(test_src.size() == 2);
  for (const std::string& src : train_src) {
    CHECK(val_src.count(src) == 0);
    CHECK(test_src.count(src) == 0);
  }
  for (const std::string& src : val_src) CHECK(test_src.count(src) == 0);

  // deterministic in the seed, sensitive to it
  const DatasetSplit same = split_dataset(groups, SplitRatios{}, 5);
  const DatasetSplit other = split_dataset(groups, SplitRatios{}, 6);
  REQUIRE(same.train.size() == split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i)
    CHECK(same.train[i].id == split.train[i].id);
  std::set<std::string> other_train;
  for (const Sample& s : other.train) other_train.insert(s.source_id);
  CHECK(other_train != train_src);
}

TEST_CASE("split validation rejects bad inputs") {
  std::vector<std::vector<Sample>> groups;
  for (int r = 0; r < 10; ++r) {
    Sample s;
    s.source_id = "rec_" + std::to_string(r);
    s.id = s.source_id + "_w1";
    s.seq = {{0, 0, 0}};
    groups.push_back({s});
  }

  std::vector<std::vector<Sample>> nine(groups.begin(), groups.begin() + 9);
  CHECK_THROWS_AS(split_dataset(nine, SplitRatios{}, 1), Error);

  CHECK_THROWS_AS(split_dataset(groups, SplitRatios{0.5, 0.2, 0.2}, 1), Error);
  CHECK_THROWS_AS(split_dataset(groups, SplitRatios{0.7, 0.0, 0.3}, 1), Error);

  auto dup = groups;
  dup[3] = dup[2];
  CHECK_THROWS_AS(split_dataset(dup, SplitRatios{}, 1), Error);

  auto mixed = groups;
  mixed[0].push_back(groups[1][0]);
  CHECK_THROWS_AS(split_dataset(mixed, SplitRatios{}, 1), Error);

  auto with_empty = groups;
  with_empty[4].clear();
  CHECK_THROWS_AS(split_dataset(with_empty, SplitRatios{}, 1), Error);
}

TEST_CASE("dataset bundles round trip through manifest and samples files") {
  const fs::path dir = fresh_dir("gyro_test_ds_roundtrip");

  DatasetManifest m;
  m.model_rate_hz = 0.5;
  m.windows_s = {10.0, 20.0, 30.0};
  m.split_seed = 77;
  m.augment_seed = 88;
  m.augmented = true;
  m.augment_cfg.psi_min_deg = 15.0;
  m.augment_cfg.psi_max_deg = 200.0;
  m.augment_cfg.delta_psi_deg = 7.5;
  m.augment_cfg.awgn_std_deg_hr = 0.3;
  m.augment_cfg.bias_range_deg_hr = 0.2;
  m.train_ids = {"rec_000", "rec_001"};
  m.validation_ids = {"rec_002"};
  m.test_ids = {"rec_003"};
  m.recordings_dir = "recs";

  DatasetSplit split;
  split.split_seed = 77;
  auto mk = [](const char* id, const char* src, double label) {
    Sample s;
    s.id = id;
    s.source_id = src;
    s.window_s = 10.0;
    s.label_deg = label;
    s.seq = {{1.25, -2.5, 0.125}, {3.0, 4.0, -5.0}};
    return s;
  };
  split.train = {mk("rec_000_w10", "rec_000", 12.5), mk("rec_001_w10", "rec_001", 340.0)};
  split.validation = {mk("rec_002_w10", "rec_002", 90.0)};
  split.test = {mk("rec_003_w10", "rec_003", 181.75)};

  save_dataset(dir.string(), m, split);
  const LoadedDataset back = load_dataset(dir.string());

  CHECK(back.manifest.model_rate_hz == m.model_rate_hz);
  CHECK(back.manifest.windows_s == m.windows_s);
  CHECK(back.manifest.split_seed == m.split_seed);
  CHECK(back.manifest.augment_seed == m.augment_seed);
  CHECK(back.manifest.augmented == m.augmented);
  CHECK(back.manifest.augment_cfg.psi_min_deg == m.augment_cfg.psi_min_deg);
  CHECK(back.manifest.augment_cfg.psi_max_deg == m.augment_cfg.psi_max_deg);
  CHECK(back.manifest.augment_cfg.delta_psi_deg == m.augment_cfg.delta_psi_deg);
  CHECK(back.manifest.augment_cfg.awgn_std_deg_hr == m.augment_cfg.awgn_std_deg_hr);
  CHECK(back.manifest.augment_cfg.bias_range_deg_hr == m.augment_cfg.bias_range_deg_hr);
  CHECK(back.manifest.train_ids == m.train_ids);
  CHECK(back.manifest.validation_ids == m.validation_ids);
  CHECK(back.manifest.test_ids == m.test_ids);
  CHECK(back.manifest.recordings_dir == m.recordings_dir);
  CHECK(back.split.split_seed == 77);

  REQUIRE(back.split.train.size() == 2);
  REQUIRE(back.split.validation.size() == 1);
  REQUIRE(back.split.test.size() == 1);
  const auto check_sample = [](const Sample& got, const Sample& want) {
    CHECK(got.id == want.id);
    CHECK(got.source_id == want.source_id);
    CHECK(got.window_s == want.window_s);
    CHECK(got.label_deg == want.label_deg);
    REQUIRE(got.seq.size() == want.seq.size());
    for (std::size_t t = 0; t < want.seq.size(); ++t)
      for (std::size_t i = 0; i < 3; ++i) CHECK(got.seq[t][i] == want.seq[t][i]);
  };
  for (std::size_t i = 0; i < 2; ++i) check_sample(back.split.train[i], split.train[i]);
  check_sample(back.split.validation[0], split.validation[0]);
  check_sample(back.split.test[0], split.test[0]);
}

TEST_CASE("dataset loading rejects missing or malformed bundles") {
  const fs::path dir = fresh_dir("gyro_test_ds_bad");
  CHECK(code_of([&] { load_dataset((dir / "absent").string()); }) == Errc::parse);

  const fs::path broken = dir / "broken";
  fs::create_directories(broken);
  spit(broken / "manifest.json", "{not json");
  CHECK(code_of([&] { load_dataset(broken.string()); }) == Errc::parse);

  const fs::path wrong = dir / "wrong_format";
  fs::create_directories(wrong);
  spit(wrong / "manifest.json", "{\"format\": \"something-else\"}");
  CHECK(code_of([&] { load_dataset(wrong.string()); }) == Errc::parse);
}
