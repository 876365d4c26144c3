// ksmix command-line front end.
//
//   ksmix run --config <path> [--out <dir>]
//   ksmix sweep --config <path> --param A --values <comma list> [--out <dir>] [--jobs <k>]
//   ksmix diag rage|semigroup|certificate --config <path> [--N <int>] [--T <t>] [--t-grid <list>]
//   ksmix inspect <snapshot>
//
// Exit codes: 0 success, 1 validation, 2 runtime, 3 I/O.

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ksmix/config.hpp"
#include "ksmix/diagnostics.hpp"
#include "ksmix/experiment.hpp"
#include "ksmix/snapshot.hpp"

namespace {

using namespace ksmix;

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kIo = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError(flag + ": not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

void print_kv(const std::string& key, double v) { std::printf("%s=%.17g\n", key.c_str(), v); }

int cmd_run(const std::string& config_path, const std::string& out) {
  SimConfig config = load_config(config_path);
  if (!out.empty()) config.output.dir = out;
  if (config.output.dir.empty()) config.output.dir = "ksmix-run";
  const RunSummary s = run_experiment(config);
  std::cout << format_outcome(s);
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& values,
              const std::string& out, unsigned jobs) {
  if (param != "A") throw UsageError("--param: only A can be swept, got '" + param + "'");
  const SimConfig config = load_config(config_path);
  std::string dir = out.empty() ? config.output.dir : out;
  if (dir.empty()) dir = "ksmix-sweep";
  const auto rows = sweep_A(config, parse_list(values, "--values"), dir, jobs);
  std::cout << kSweepHeader << "\n";
  for (const auto& row : rows) {
    std::cout << format_sweep_row(row) << "\n";
    if (!row.error.empty()) std::cerr << "A=" << row.A << ": " << row.error << "\n";
  }
  return kOk;
}

int cmd_diag(const std::string& what, const std::string& config_path, int radius, double horizon,
             const std::string& t_grid) {
  const SimConfig config = load_config(config_path);
  const TorusGrid grid = config.grid();
  const int N = radius > 0 ? radius : config.diag_radius;
  const ScalarField f = build_initial_field(config.ic, grid);
  const TransportControl control{config.c_cfl, config.dt_max};
  if (what == "rage") {
    const double T = horizon > 0.0 ? horizon : config.horizon;
    const RageResult r = rage_average(make_flow(config.flow, grid), f, N, T, control);
    print_kv("N", N);
    print_kv("T", T);
    print_kv("initial", r.initial);
    print_kv("average", r.average);
    print_kv("ratio", r.average / r.initial);
    print_kv("final_energy", r.final_energy);
    std::printf("normalized=%s\n", r.normalized ? "true" : "false");
    return kOk;
  }
  if (what == "semigroup") {
    std::vector<double> times;
    if (t_grid.empty()) {
      for (int i = 0; i <= 10; ++i) times.push_back(0.05 * i);
    } else {
      times = parse_list(t_grid, "--t-grid");
    }
    const SemigroupReport r = semigroup_bound_check(make_flow(config.flow, grid), f, N, times, control);
    std::printf("t,ratio\n");
    for (const auto& p : r.points) std::printf("%.17g,%.17g\n", p.t, p.ratio);
    print_kv("max_ratio", r.max_ratio);
    std::printf("within_bound=%s\n", r.within_bound() ? "true" : "false");
    return kOk;
  }
  if (what == "certificate") {
    const KernelSpec spec(config.dim, config.beta);
    const KernelNorms norms = kernel_l1_norms(spec, grid);
    const Certificate c = certificate(f, spec, norms.lap_l1);
    print_kv("C0", c.C0);
    print_kv("C0_sensitivity", norms.lap_sensitivity());
    print_kv("grad_K_l1", norms.grad_l1);
    print_kv("C_inf", c.C_inf);
    print_kv("B0", c.B0);
    print_kv("mean0", c.mean0);
    print_kv("tau0", c.tau0);
    print_kv("tau1", c.tau1);
    print_kv("theta", c.theta);
    print_kv("blowup_amplitude_threshold", 20.0 / c.C0);
    return kOk;
  }
  throw UsageError("diag: unknown diagnostic '" + what + "' (expected rage, semigroup or certificate)");
}

int cmd_inspect(const std::string& path) {
  const Snapshot s = read_snapshot(path);
  std::printf("rank=%zu\n", s.extents.size());
  std::printf("extents=");
  for (std::size_t i = 0; i < s.extents.size(); ++i) std::printf(i ? "x%u" : "%u", s.extents[i]);
  std::printf("\n");
  std::printf("values=%zu\n", s.values.size());
  if (!s.values.empty()) {
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    double sum = 0.0;
    bool finite = true;
    for (double v : s.values) {
      sum += v;
      finite = finite && std::isfinite(v);
    }
    print_kv("min", *lo);
    print_kv("max", *hi);
    print_kv("mean", sum / static_cast<double>(s.values.size()));
    std::printf("finite=%s\n", finite ? "true" : "false");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral Keller-Segel simulator with mixing diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out, param, values, what, t_grid, snapshot_path;
  unsigned jobs = 0;
  int radius = 0;
  double horizon = 0.0;

  auto* run = app.add_subcommand("run", "integrate one configuration");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out, "output directory (overrides output.dir)");

  auto* sweep = app.add_subcommand("sweep", "run a configuration for several amplitudes");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--param", param, "swept parameter")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", out, "sweep directory (overrides output.dir)");
  sweep->add_option("--jobs", jobs, "concurrent runs (0: hardware concurrency)");

  auto* diag = app.add_subcommand("diag", "transport and certificate diagnostics");
  diag->add_option("what", what, "rage | semigroup | certificate")->required();
  diag->add_option("--config", config_path, "config file")->required();
  diag->add_option("--N", radius, "projection radius (default diag.N)");
  diag->add_option("--T", horizon, "averaging horizon (default T)");
  diag->add_option("--t-grid", t_grid, "comma-separated sample times");

  auto* inspect = app.add_subcommand("inspect", "summarize a snapshot file");
  inspect->add_option("snapshot", snapshot_path, "snapshot path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config_path, out);
    if (*sweep) return cmd_sweep(config_path, param, values, out, jobs);
    if (*diag) return cmd_diag(what, config_path, radius, horizon, t_grid);
    if (*inspect) return cmd_inspect(snapshot_path);
  } catch (const ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "error: " << msg << "\n";
    return kValidation;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SnapshotError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
