#pragma once

// Experiment orchestration: single runs written to disk and A-sweeps.
//
// A run directory holds
//   series.csv   one row per record, header kSeriesHeader, %.17g values
//   outcome.txt  key=value summary (classification, peaks, checks)
//   config.txt   the config that produced it
//   final.ksf    final density snapshot
//   snap_NNNNNN.ksf  per-record snapshots when output.snapshots is set

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksmix/config.hpp"
#include "ksmix/dynamics.hpp"

namespace ksmix {

struct RunSummary {
  OutcomeReport report;
  double mean_phi = 0.0;
  double flagged_time_fraction = 0.0;
  double phi_threshold = 0.0;
  MeanDecay mean_decay;
  std::size_t records = 0;
};

RunSummary summarize(const RunResult& result, const SimConfig& config);
std::string format_outcome(const RunSummary& summary);

/// Runs the config and writes the artifacts into `dir` (created if needed).
RunSummary run_experiment(const SimConfig& config, const std::filesystem::path& dir);
/// Uses config.output.dir, which must be set.
RunSummary run_experiment(const SimConfig& config);

struct SweepRow {
  double A = 0.0;
  std::string classification;  // "error" when the child failed
  double peak_linf = 0.0;
  double mean_phi = 0.0;
  double flagged_time_fraction = 0.0;
  std::string error;
};

inline constexpr char kSweepHeader[] = "A,classification,peak_linf,mean_phi,flagged_time_fraction";

/// Runs every amplitude (concurrently, up to `jobs` at a time; 0 = hardware
/// concurrency) into dir/A_<value>/ and writes dir/sweep.csv sorted by A.
/// A failing child is recorded in its row; the sweep continues.
std::vector<SweepRow> sweep_A(const SimConfig& config, std::vector<double> values,
                              const std::filesystem::path& dir, unsigned jobs = 0);

std::string format_sweep_row(const SweepRow& row);

}  // namespace ksmix
