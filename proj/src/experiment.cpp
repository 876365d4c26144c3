#include "ksmix/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ksmix/snapshot.hpp"

namespace ksmix {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.ksf", index);
  return buf;
}

std::string amplitude_dir(double A) { return "A_" + num(A); }

}  // namespace

RunSummary summarize(const RunResult& result, const SimConfig& config) {
  RunSummary s;
  s.report = result.report;
  s.records = result.records.size();
  s.mean_phi = mean_phi(result.records);
  s.phi_threshold = phi_threshold(config.diag_radius, config.beta - config.dim);
  s.flagged_time_fraction = flagged_time_fraction(result.records, s.phi_threshold);
  s.mean_decay = mean_decay_residual(result.records, config.alpha);
  return s;
}

std::string format_outcome(const RunSummary& s) {
  const OutcomeReport& r = s.report;
  std::ostringstream out;
  out << "classification=" << to_string(r.classification) << "\n";
  out << "t_final=" << num(r.t_final) << "\n";
  out << "horizon=" << num(r.horizon) << "\n";
  out << "steps=" << r.steps << "\n";
  out << "initial_linf=" << num(r.initial_linf) << "\n";
  out << "peak_linf=" << num(r.peak_linf) << "\n";
  out << "tail_fraction=" << num(r.tail_fraction) << "\n";
  out << "max_tail_fraction=" << num(r.max_tail_fraction) << "\n";
  out << "min_value=" << num(r.min_value) << "\n";
  out << "mean_phi=" << num(s.mean_phi) << "\n";
  out << "phi_threshold=" << num(s.phi_threshold) << "\n";
  out << "flagged_time_fraction=" << num(s.flagged_time_fraction) << "\n";
  if (s.mean_decay.applicable) out << "mean_decay_residual=" << num(s.mean_decay.residual) << "\n";
  if (r.slope.evaluated) {
    out << "slope_C0=" << num(r.slope.C0) << "\n";
    out << "slope_checked_steps=" << r.slope.checked_steps << "\n";
    out << "slope_worst_margin=" << num(r.slope.worst_margin) << "\n";
    out << "slope_tolerance=" << num(r.slope.tolerance) << "\n";
    out << "slope_check=" << (r.slope.passed() ? "pass" : "fail") << "\n";
  }
  out << "records=" << s.records << "\n";
  return out.str();
}

RunSummary run_experiment(const SimConfig& config, const fs::path& dir) {
  validate(config);
  make_dir(dir);
  {
    auto cfg = open_out(dir / "config.txt");
    cfg << format_config(config);
    check_written(cfg, dir / "config.txt");
  }

  const fs::path series_path = dir / "series.csv";
  auto series = open_out(series_path);
  series << kSeriesHeader << "\n";
  std::size_t snap_index = 0;
  const TorusGrid grid = config.grid();
  const ScalarField rho0 = build_initial_field(config.ic, grid);
  const RunSetup setup = setup_from_config(config);

  RecordSink sink = [&](const DiagnosticsRecord& r) { series << format_record(r) << "\n"; };
  FieldSink field_sink;
  if (config.output.snapshots) {
    field_sink = [&](const ScalarField& f) { write_snapshot(f, dir / snapshot_name(snap_index++)); };
  }
  const RunResult result = simulate(rho0, setup, sink, field_sink);
  check_written(series, series_path);

  if (result.final_field) write_snapshot(*result.final_field, dir / "final.ksf");
  RunSummary summary = summarize(result, config);
  auto outcome = open_out(dir / "outcome.txt");
  outcome << format_outcome(summary);
  check_written(outcome, dir / "outcome.txt");
  return summary;
}

RunSummary run_experiment(const SimConfig& config) {
  if (config.output.dir.empty()) throw ConfigError({"output.dir: required to write a run"});
  return run_experiment(config, config.output.dir);
}

std::string format_sweep_row(const SweepRow& row) {
  return num(row.A) + "," + row.classification + "," + num(row.peak_linf) + "," + num(row.mean_phi) +
         "," + num(row.flagged_time_fraction);
}

std::vector<SweepRow> sweep_A(const SimConfig& config, std::vector<double> values, const fs::path& dir,
                              unsigned jobs) {
  if (values.empty()) throw ConfigError({"sweep: at least one value of A is required"});
  std::vector<std::string> errors;
  for (double A : values) {
    if (!(A >= 0.0) || !std::isfinite(A)) errors.push_back("sweep: A must be finite and >= 0, got " + num(A));
  }
  if (!errors.empty()) throw ConfigError(errors);
  validate(config);
  std::sort(values.begin(), values.end());
  make_dir(dir);

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.A = values[i];
      try {
        SimConfig child = config;
        child.flow.amplitude = values[i];
        const fs::path child_dir = dir / amplitude_dir(values[i]);
        child.output.dir = child_dir.string();
        const RunSummary s = run_experiment(child, child_dir);
        row.classification = to_string(s.report.classification);
        row.peak_linf = s.report.peak_linf;
        row.mean_phi = s.mean_phi;
        row.flagged_time_fraction = s.flagged_time_fraction;
      } catch (const std::exception& e) {
        row.classification = "error";
        row.peak_linf = row.mean_phi = row.flagged_time_fraction = std::nan("");
        row.error = e.what();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(values.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const fs::path path = dir / "sweep.csv";
  auto out = open_out(path);
  out << kSweepHeader << "\n";
  for (const auto& row : rows) out << format_sweep_row(row) << "\n";
  check_written(out, path);

  bool any_error = false;
  for (const auto& row : rows) any_error = any_error || !row.error.empty();
  if (any_error) {
    auto err = open_out(dir / "sweep_errors.txt");
    for (const auto& row : rows) {
      if (!row.error.empty()) err << num(row.A) << ": " << row.error << "\n";
    }
  }
  return rows;
}

}  // namespace ksmix
