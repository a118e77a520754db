#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lindexp/config.hpp"
#include "lindexp/diagnostics.hpp"

namespace lindexp {

// Environment variable naming the directory under which run outputs go when
// neither the caller nor the config gives an explicit directory.
inline constexpr const char* kOutputRootEnv = "LINDEXP_OUTPUT_ROOT";

struct SummaryRow {
  std::string variant;
  RunScheme scheme = RunScheme::Free;
  long steps = 0;
  double tau = 0.0;
  double error = 0.0;  // NaN when no oracle is configured
  double max_abs_trace_deviation = 0.0;
  double min_min_eig = 0.0;
  Index max_rank = 0;
  double wall_time = 0.0;  // seconds, monotonic clock
  std::string steps_file;  // relative to the output directory
};

struct SlopeRecord {
  std::string variant;
  RunScheme scheme = RunScheme::Free;
  double slope = 0.0;
  std::size_t points = 0;
};

struct RunRecord {
  std::string config_hash;
  std::string name;
  ExperimentKind kind = ExperimentKind::Convergence;
  std::string output_dir;
  std::vector<SummaryRow> rows;
  // Fitted log-log slope per (variant, scheme) with at least three errors.
  std::vector<SlopeRecord> slopes;
  std::vector<CeProbeRow> probe_rows;
  std::vector<std::string> files;
  double wall_time = 0.0;
};

struct RunOptions {
  // Overrides the config's output directory when non-empty.
  std::string output_dir;
  // Overrides the config's thread count when > 0.
  int threads = 0;
  bool write_files = true;
};

/// Runs every (variant, scheme, N) entry of the config, writes summary.csv,
/// one steps CSV per entry and run.json, and returns the record. On failure
/// the files written so far are removed and the error is rethrown.
RunRecord run_experiment(const ExperimentConfig& config,
                         const RunOptions& options = {});

/// Directory a run writes to: the explicit override, else config.output_dir,
/// else <root>/<name> with root from LINDEXP_OUTPUT_ROOT (default "results").
std::string resolve_output_dir(const ExperimentConfig& config,
                               const RunOptions& options);

std::vector<std::string> preset_names();
// Source JSON of a preset; throws ParameterError for an unknown name.
std::string preset_document(std::string_view name);
ExperimentConfig preset(std::string_view name);

// CSV text of the fixed-column outputs.
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string steps_csv(const std::vector<StepDiagnostics>& rows,
                      const std::vector<Index>& populations);
std::string ce_probe_csv(const std::vector<CeProbeRow>& rows);
std::string run_record_json(const RunRecord& record);

// "%.16e", with nan / inf spelled as such.
std::string format_number(double v);

}  // namespace lindexp
