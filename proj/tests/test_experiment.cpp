#include "doctest.h"

#include <omp.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ksmix/experiment.hpp"
#include "ksmix/snapshot.hpp"

using namespace ksmix;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ksmix_test_experiment_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

std::vector<double> columns(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

SimConfig small_config() {
  return parse_config(
      "dim = 3\nn = 12\nT = 0.2\nA = 2\nflow = alternating-shear\nflow.half_period = 0.05\n"
      "flow.seed = 4\nic.amplitude = 2\nic.width = 0.8\noutput.every = 2\n");
}

int cli(const std::string& args) {
  const std::string cmd = std::string(KSMIX_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run directory contents") {
  const fs::path dir = scratch("run");
  SimConfig c = small_config();
  c.output.snapshots = true;
  const RunSummary s = run_experiment(c, dir);

  const auto series = lines(slurp(dir / "series.csv"));
  REQUIRE(series.size() == s.records + 1);
  CHECK(series.front() == kSeriesHeader);
  for (std::size_t i = 1; i < series.size(); ++i) CHECK(columns(series[i]).size() == 12);
  CHECK(columns(series[1])[0] == 0.0);
  CHECK(columns(series.back())[0] == doctest::Approx(0.2));

  const auto outcome = lines(slurp(dir / "outcome.txt"));
  CHECK(outcome.front() == "classification=" + to_string(s.report.classification));
  CHECK(slurp(dir / "outcome.txt") == format_outcome(s));
  CHECK(slurp(dir / "outcome.txt").find("slope_check=pass") != std::string::npos);
  CHECK(slurp(dir / "outcome.txt").find("mean_decay_residual=") != std::string::npos);

  CHECK(parse_config(slurp(dir / "config.txt")).flow.seed == 4);
  const ScalarField last = read_field(dir / "final.ksf");
  CHECK(last.grid == c.grid());
  std::size_t snaps = 0;
  for (const auto& e : fs::directory_iterator(dir)) snaps += e.path().filename().string().rfind("snap_", 0) == 0;
  CHECK(snaps == s.records);
  CHECK(fs::exists(dir / "snap_000000.ksf"));
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical, independent of the thread count") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const SimConfig c = small_config();
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  run_experiment(c, a);
  omp_set_num_threads(std::max(2, threads));
  run_experiment(c, b);
  omp_set_num_threads(threads);
  for (const char* f : {"series.csv", "outcome.txt", "final.ksf", "config.txt"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("without the nonlinear term the mean-free norm decays as exp(-t)") {
  const fs::path dir = scratch("linear");
  SimConfig c = small_config();
  c.disable_nonlinear = true;
  c.horizon = 1.0;
  c.output.every = 1;
  c.ic.kind = IcKind::RandomBand;
  c.ic.seed = 11;
  c.ic.k_max = 2;
  run_experiment(c, dir);
  const auto series = lines(slurp(dir / "series.csv"));
  const double l0 = columns(series[1])[6];
  for (std::size_t i = 1; i < series.size(); ++i) {
    const auto v = columns(series[i]);
    CHECK(std::abs(v[6] - std::exp(-v[0]) * l0) <= 1e-6 * l0);
  }
  fs::remove_all(dir);
}

TEST_CASE("run_experiment requires an output directory") {
  CHECK_THROWS_AS(run_experiment(small_config()), ConfigError);
  SimConfig bad = small_config();
  bad.n = 14;
  CHECK_THROWS_AS(run_experiment(bad, scratch("bad")), ConfigError);
}

TEST_CASE("sweep rows are sorted and failures stay in their row") {
  const fs::path dir = scratch("sweep");
  fs::create_directories(dir);
  { std::ofstream block(dir / "A_2"); }  // a file where the child directory should go
  SimConfig c = small_config();
  c.horizon = 0.05;
  const auto rows = sweep_A(c, {4.0, 0.0, 2.0}, dir, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].A == 0.0);
  CHECK(rows[1].A == 2.0);
  CHECK(rows[2].A == 4.0);
  CHECK(rows[1].classification == "error");
  CHECK_FALSE(rows[1].error.empty());
  CHECK(rows[0].classification == "resolved-horizon");
  CHECK(rows[2].classification == "resolved-horizon");

  const auto csv = lines(slurp(dir / "sweep.csv"));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == kSweepHeader);
  CHECK(csv[1] == format_sweep_row(rows[0]));
  CHECK(csv[2].rfind("2,error,nan", 0) == 0);
  CHECK(fs::exists(dir / "sweep_errors.txt"));
  CHECK(fs::exists(dir / "A_4" / "series.csv"));

  CHECK_THROWS_AS(sweep_A(c, {}, dir), ConfigError);
  CHECK_THROWS_AS(sweep_A(c, {1.0, -2.0}, dir), ConfigError);
  CHECK_THROWS_AS(sweep_A(c, {NAN}, dir), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("a single-value sweep of a concentrated bump blows up") {
  const fs::path dir = scratch("blow");
  const SimConfig c = parse_config("dim = 3\nn = 32\nT = 2\nic.amplitude = 10\nic.width = 0.5\noutput.every = 20\n");
  const auto rows = sweep_A(c, {0.0}, dir);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].classification == "blowup-suspected");
  const std::string outcome = slurp(dir / "A_0" / "outcome.txt");
  CHECK(outcome.rfind("classification=blowup-suspected\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path good = dir / "good.cfg", bad = dir / "bad.cfg", junk = dir / "junk.ksf";
  {
    std::ofstream(good) << "dim = 3\nn = 8\nT = 0.05\n";
    std::ofstream(bad) << "dim = 3\nbeta = 3.2\n";
    std::ofstream(junk) << "not a snapshot";
  }
  CHECK(cli("run --config " + good.string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "outcome.txt"));
  CHECK(cli("inspect " + (dir / "out" / "final.ksf").string()) == 0);
  CHECK(cli("diag certificate --config " + good.string()) == 0);
  CHECK(cli("diag semigroup --config " + good.string() + " --t-grid 0,0.1") == 0);
  CHECK(cli("sweep --config " + good.string() + " --param A --values 0,1 --out " + (dir / "sw").string()) == 0);
  CHECK(fs::exists(dir / "sw" / "sweep.csv"));

  CHECK(cli("run --config " + bad.string()) == 1);
  CHECK(cli("") == 1);
  CHECK(cli("run") == 1);
  CHECK(cli("diag entropy --config " + good.string()) == 1);
  CHECK(cli("sweep --config " + good.string() + " --param beta --values 1") == 1);
  CHECK(cli("sweep --config " + good.string() + " --param A --values 1,x") == 1);
  CHECK(cli("run --config " + (dir / "missing.cfg").string()) == 3);
  CHECK(cli("inspect " + junk.string()) == 3);
  fs::remove_all(dir);
}
