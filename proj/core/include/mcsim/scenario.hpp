// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration (one run) and experiment matrices (many runs), both
// read from JSON. See docs/config.md for the schema.

#ifndef MCSIM_SCENARIO_HPP
#define MCSIM_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcsim/pdcp_tx.hpp"
#include "mcsim/trace.hpp"

namespace mcsim {

/// Invalid configuration; what() starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kSC, kDcNoR, kDcReo, kDcDup };
enum class TrafficType { kTcp, kUdp };

std::string_view to_string(Mode mode);
std::string_view to_string(TrafficType type);
std::optional<Mode> parse_mode(std::string_view name);
std::optional<TrafficType> parse_traffic_type(std::string_view name);

struct PathConfig {
  std::string id;
  std::string trace_file;        // as written in the config; empty if inline
  std::vector<int> cqi_samples;  // inline trace, used when trace_file is empty
  ChannelTrace trace;            // resolved
  double peak_rate_mbps = 0.0;
  double backhaul_delay_ms = 10.0;
  double prop_delay_ms = 1.0;
  int queue_limit_pdus = 500;
  double loss_prob = 0.0;

  bool operator==(const PathConfig&) const = default;
};

struct TrafficConfig {
  TrafficType type = TrafficType::kTcp;
  double udp_rate_mbps = 0.0;
  int sdu_bytes = 1400;
  double stop_s = 0.0;        // <= 0: run to the end
  std::uint64_t max_sdus = 0;  // 0: unlimited

  bool operator==(const TrafficConfig&) const = default;
};

struct TcpConfig {
  double initial_cwnd = 10.0;
  double initial_ssthresh = 64.0;
  double initial_rto_ms = 200.0;
  double min_rto_ms = 200.0;
  double max_rto_ms = 60000.0;
  double uplink_delay_ms = 5.0;
  std::uint64_t rwnd_segments = std::uint64_t{1} << 20;

  bool operator==(const TcpConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "both";  // csv | json | both

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Mode mode = Mode::kSC;
  std::vector<PathConfig> paths;  // paths[0] is the anchor; its backhaul delay is 0
  FlowPolicy policy = FlowPolicy::kRoundRobin;
  double feedback_delay_ms = 0.0;
  bool reordering = true;
  double t_reordering_ms = 100.0;
  TrafficConfig traffic;
  TcpConfig tcp;
  double duration_s = 30.0;
  std::uint64_t seed = 1;
  int sn_len = 12;
  OutputConfig output;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Applies mode-implied settings (reordering, policy, anchor backhaul) and
/// checks every invariant. Throws ConfigError.
void validate(ScenarioConfig& cfg);

/// Parses one scenario. Trace files are resolved against `base_dir`.
ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
ScenarioConfig load_config(const std::filesystem::path& file);
/// Canonical JSON form; parse_config(serialize_config(c), same base) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// A variant overrides mode and path selection of the base scenario.
struct MatrixVariant {
  std::string key;
  Mode mode = Mode::kSC;
  std::vector<std::string> path_ids;  // empty: all base paths in order
  std::optional<FlowPolicy> policy;
};

struct ExperimentMatrix {
  ScenarioConfig base;
  std::vector<MatrixVariant> variants;  // empty: the base scenario alone
  /// Swept only for variants with reordering on; empty = base value.
  std::vector<double> t_reordering_ms;
  std::vector<TrafficType> traffic;     // empty = base value
  std::vector<std::uint64_t> seeds;     // empty = base value
  std::string baseline;                 // variant key used for relative gains
};

struct ExpandedRun {
  std::string key;
  std::string variant;
  ScenarioConfig config;
};

/// Accepts either a matrix document ({"base": ..., ...}) or a plain scenario.
ExperimentMatrix parse_matrix(const std::string& json_text, const std::filesystem::path& base_dir);
ExperimentMatrix load_matrix(const std::filesystem::path& file);

/// Cartesian expansion; keys are unique. Throws ConfigError otherwise.
std::vector<ExpandedRun> expand(const ExperimentMatrix& matrix);

}  // namespace mcsim

#endif  // MCSIM_SCENARIO_HPP
