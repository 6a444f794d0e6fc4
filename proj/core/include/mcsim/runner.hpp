// SPDX-License-Identifier: Apache-2.0
//
// End-to-end execution of scenarios and experiment matrices.

#ifndef MCSIM_RUNNER_HPP
#define MCSIM_RUNNER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/metrics.hpp"
#include "mcsim/scenario.hpp"

namespace mcsim {

/// Runs one scenario to completion. Deterministic in (cfg, run_key).
RunMetrics run_scenario(const ScenarioConfig& cfg, const std::string& run_key = {});

/// Metadata embedded in the JSON output (config echo, policy provenance).
std::string run_metadata_json(const ScenarioConfig& cfg);

/// Writes <dir>/<key>.csv and/or <dir>/<key>.json per `format`
/// (csv | json | both). Returns the files written.
std::vector<std::filesystem::path> write_run_outputs(const RunMetrics& m, const ScenarioConfig& cfg,
                                                     const std::filesystem::path& dir,
                                                     const std::string& format);

struct RunOutcome {
  std::string key;
  std::string variant;
  ScenarioConfig config;
  std::optional<RunMetrics> metrics;
  std::string error;  // set iff metrics is empty
};

/// Executes every run on up to `parallelism` threads. Results are ordered as
/// in `runs` regardless of parallelism; a failing run does not stop others.
std::vector<RunOutcome> run_matrix(const std::vector<ExpandedRun>& runs, unsigned parallelism);

/// One row per run. Gains are relative to the `baseline` variant with the
/// same traffic type and seed, when present.
std::string summary_csv(const std::vector<RunOutcome>& outcomes, const std::string& baseline);

}  // namespace mcsim

#endif  // MCSIM_RUNNER_HPP
