// End-to-end checks of the command line binary. The test runner exports
// GYROCOMPASS_CLI with the binary path; without it every case is skipped so
// the suite still runs standalone.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("GYROCOMPASS_CLI"); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

int run_cli_capture(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(cli_path()) + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

#define SKIP_WITHOUT_CLI()                                   \
  if (cli_path() == nullptr) {                               \
    MESSAGE("GYROCOMPASS_CLI not set, skipping");            \
    return;                                                  \
  }

}  // namespace

TEST_CASE("usage errors exit 64") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_usage");
  CHECK(run_cli("") == 64);
  CHECK(run_cli("frobnicate") == 64);
  CHECK(run_cli("simulate") == 64);  // --out is required
  CHECK(run_cli("dataset --out " + (dir / "d").string()) == 64);
  CHECK(run_cli("simulate --out " + (dir / "s").string() + " --preset bogus") == 64);

  const fs::path log = dir / "err.txt";
  CHECK(run_cli_capture("frobnicate", log) == 64);
  CHECK(slurp(log).rfind("error: usage:", 0) == 0);
}

TEST_CASE("missing input files exit 66") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_missing");
  CHECK(run_cli("allan --input " + (dir / "absent.csv").string()) == 66);
  CHECK(run_cli("train --dataset " + (dir / "absent").string()) == 66);
  CHECK(run_cli("evaluate --dataset " + (dir / "absent").string() + " --checkpoint " +
                (dir / "ck.json").string()) == 66);
}

TEST_CASE("malformed or unusable data exits 65") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_malformed");
  {
    std::ofstream out(dir / "garbage.csv");
    out << "this is not a recording\n1,2,3\n";
  }
  CHECK(run_cli("allan --input " + (dir / "garbage.csv").string()) == 65);

  // a directory with no recordings at all
  const fs::path empty = dir / "empty";
  fs::create_directories(empty);
  CHECK(run_cli("dataset --recordings " + empty.string() + " --out " +
                (dir / "ds").string()) == 65);

  // too few recordings to split
  const fs::path few = dir / "few";
  CHECK(run_cli("simulate --out " + few.string() +
                " --count 3 --seed 1 --preset clean --duration 30 --rate 10") == 0);
  CHECK(run_cli("dataset --recordings " + few.string() + " --out " + (dir / "ds2").string() +
                " --windows 10,20") == 65);
}

TEST_CASE("simulate writes deterministic recordings") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_sim");
  const std::string common =
      " --count 2 --seed 11 --preset datasheet --duration 2 --rate 50 --lat 32.76";
  CHECK(run_cli("simulate --out " + (dir / "a").string() + common) == 0);
  CHECK(run_cli("simulate --out " + (dir / "b").string() + common) == 0);
  CHECK(run_cli("simulate --out " + (dir / "c").string() +
                " --count 2 --seed 12 --preset datasheet --duration 2 --rate 50 --lat 32.76") ==
        0);

  REQUIRE(fs::exists(dir / "a" / "rec_000.csv"));
  REQUIRE(fs::exists(dir / "a" / "rec_001.csv"));
  CHECK(first_line(dir / "a" / "rec_000.csv") == "# gyrocompass-recording v1");
  CHECK(slurp(dir / "a" / "rec_000.csv") == slurp(dir / "b" / "rec_000.csv"));
  CHECK(slurp(dir / "a" / "rec_001.csv") == slurp(dir / "b" / "rec_001.csv"));
  CHECK(slurp(dir / "a" / "rec_000.csv") != slurp(dir / "c" / "rec_000.csv"));
}

TEST_CASE("allan subcommand emits curve and parameter files") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_allan");
  CHECK(run_cli("simulate --out " + dir.string() +
                " --count 1 --seed 5 --preset datasheet --duration 120 --rate 50 --yaw 30") == 0);
  const std::string curve = (dir / "allan.csv").string();
  const std::string params = (dir / "noise.json").string();
  CHECK(run_cli("allan --input " + (dir / "rec_000.csv").string() + " --out-curve " + curve +
                " --out-params " + params) == 0);
  CHECK(first_line(curve) == "tau_s,adev_x_deg_hr,adev_y_deg_hr,adev_z_deg_hr");
  const std::string j = slurp(params);
  CHECK(!j.empty());
  CHECK(j.front() == '{');
  CHECK(j.find("\"arw_deg_rthr\"") != std::string::npos);
}

TEST_CASE("the full pipeline runs and reproduces its reports byte for byte") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_pipeline");

  const auto chain = [&](const fs::path& root) {
    const std::string recs = (root / "recs").string();
    const std::string ds = (root / "ds").string();
    const std::string ck = (root / "checkpoint.json").string();
    const std::string rep = (root / "train_report.csv").string();
    const std::string out = (root / "reports").string();
    REQUIRE(run_cli("simulate --out " + recs +
                    " --count 10 --seed 3 --preset datasheet --duration 60 --rate 10"
                    " --lat 32.76") == 0);
    REQUIRE(run_cli("dataset --recordings " + recs + " --out " + ds +
                    " --model-rate 0.5 --windows 10,20 --split-seed 1") == 0);
    REQUIRE(run_cli("train --dataset " + ds + " --checkpoint " + ck + " --report " + rep +
                    " --layers 1 --hidden 4 --epochs 3 --batch 8 --lr 0.01"
                    " --init-seed 10 --train-seed 10") == 0);
    REQUIRE(run_cli("compare --dataset " + ds + " --checkpoint " + ck + " --out-dir " + out) ==
            0);
  };
  chain(dir / "run1");
  chain(dir / "run2");

  for (const char* f : {"reports/comparison.csv", "reports/boxplot.csv",
                        "reports/time_to_accuracy.csv", "reports/median_curve.csv",
                        "reports/single_run_trace.csv", "checkpoint.json",
                        "train_report.csv"}) {
    const std::string a = slurp(dir / "run1" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "run2" / f));
  }
  CHECK(first_line(dir / "run1" / "reports" / "comparison.csv") ==
        "window_s,method,median_deg,iqr_deg,improvement_pct");
}

TEST_CASE("kernel dispatch override is accepted") {
  SKIP_WITHOUT_CLI();
  const fs::path dir = fresh_dir("gyro_cli_kernels");
  const std::string common = " --count 1 --seed 2 --preset clean --duration 2 --rate 50";
  const std::string base = std::string(cli_path()) + " simulate --out ";
  for (const char* variant : {"scalar", "avx2"}) {
    const fs::path out = dir / variant;
    const std::string cmd = "GYROCOMPASS_KERNELS=" + std::string(variant) + " " + base +
                            out.string() + common + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(out / "rec_000.csv"));
  }
  // the clean preset is arithmetic only, so both variants must agree exactly
  CHECK(slurp(dir / "scalar" / "rec_000.csv") == slurp(dir / "avx2" / "rec_000.csv"));
}
