#pragma once

// Batch orchestration behind the command-line tool: the time loop with its
// CSV and JSON outputs, and parameter sweeps over independent trajectories.

#include <filesystem>
#include <string>
#include <vector>

#include "msnt/config.hpp"
#include "msnt/diagnostics.hpp"

namespace msnt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitStepFailed = 2;
inline constexpr int kExitInvariant = 3;

struct RunOptions {
  bool strict = false;       // audit invariants after every step
  bool write_files = true;   // diagnostics CSV, snapshot CSV, error JSON
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<DiagnosticsRecord> records;  // every step, including t = 0
  std::vector<LocalState> final_cells;
  std::string error_json;  // empty on success
  double wall_seconds = 0.0;
};

/// Runs one trajectory. Never throws for StepFailed or failed audits; those
/// are reported through exit_code and error_json.
RunOutcome run(const RunConfig& cfg, const RunOptions& options = {});

/// Header comment carrying the fully resolved configuration.
std::string config_header(const RunConfig& cfg);

std::string diagnostics_csv(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& records);
std::string snapshot_csv(const RunConfig& cfg, const Grid& g, const std::vector<LocalState>& cells);

/// Parameters a sweep may vary.
std::vector<std::string> sweep_parameters();

/// Copy of cfg with one parameter replaced. Throws ValidationError for unknown names.
RunConfig with_parameter(const RunConfig& cfg, const std::string& param, double value);

struct SweepRow {
  double value = 0.0;
  int exit_code = kExitOk;
  double final_entropy = 0.0;
  double final_relative_entropy = 0.0;  // NaN when not comparable with the reference
  double wall_seconds = 0.0;
  std::filesystem::path directory;
};

struct SweepOutcome {
  int exit_code = kExitOk;
  std::vector<SweepRow> rows;  // in the order of `values`
  std::size_t reference = 0;   // index of the finest run
};

/// Runs one trajectory per value, at most MSNT_THREADS at a time, each into
/// <output.directory>/<param>_<value>/. The reference run is the finest
/// resolution (smallest tau, largest N) or, for epsilon and lambda, the
/// smallest value. Writes summary.csv into the output directory.
SweepOutcome sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
                   const RunOptions& options = {});

std::string summary_csv(const std::string& param, const SweepOutcome& outcome);

}  // namespace msnt
