// SPDX-License-Identifier: Apache-2.0
//
// Run metrics: application goodput, SDU fates, reorder-buffer occupancy,
// delay percentiles, TCP recovery counters and per-path radio statistics.

#ifndef MCSIM_METRICS_HPP
#define MCSIM_METRICS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mcsim/sim_core.hpp"

namespace mcsim {

inline constexpr int kMetricsSchemaVersion = 1;

struct PathReport {
  std::string id;
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t dropped_overflow = 0;
  std::uint64_t dropped_loss = 0;
  std::int64_t bytes_sent = 0;
  double capacity_bits = 0.0;           // integral of link capacity over the run
  std::vector<double> radio_bps;        // per second, bits serialized
  std::vector<std::int64_t> queue_bytes;  // sampled at each whole second

  bool operator==(const PathReport&) const = default;
};

/// Finalized metrics of one run. Floating-point fields are rounded to six
/// significant digits, the precision at which they are emitted.
struct RunMetrics {
  std::string run_key;
  double duration_s = 0.0;

  std::vector<double> goodput_bps;  // per second, application level
  double mean_goodput_bps = 0.0;
  double capacity_bits = 0.0;       // sum over paths

  // Fate of every submitted SDU; these five sum to `submitted`.
  std::uint64_t submitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t declared_lost = 0;
  std::uint64_t stale_discarded = 0;
  std::uint64_t path_dropped = 0;
  std::uint64_t residual = 0;

  std::uint64_t ooo_delivered = 0;
  std::uint64_t duplicate_discarded = 0;

  double reorder_mean_bytes = 0.0;
  std::int64_t reorder_max_bytes = 0;

  std::optional<double> delay_p50_ms;
  std::optional<double> delay_p95_ms;
  std::optional<double> delay_p99_ms;

  std::uint64_t tcp_retransmissions = 0;
  std::uint64_t tcp_fast_retransmits = 0;
  std::uint64_t tcp_rto_events = 0;

  std::uint64_t events_processed = 0;
  std::string trace_digest;

  std::vector<PathReport> paths;

  bool operator==(const RunMetrics&) const = default;
};

/// Rounds to six significant digits (the "%.6g" value).
double round_sig6(double x);

/// 100 * (a - b) / b; empty when b <= 0.
std::optional<double> relative_gain(double a, double b);

class MetricsCollector {
 public:
  explicit MetricsCollector(SimTime duration);

  /// One application-level delivery. Throws std::logic_error if
  /// delivered_at < created_at.
  void record_delivery(std::int32_t bytes, SimTime created_at, SimTime delivered_at,
                       bool in_order);
  /// Out-of-order PDCP delivery that is not itself an application delivery.
  void record_out_of_order() { ++ooo_delivered_; }
  void record_duplicate() { ++duplicate_discarded_; }
  /// Reorder buffer holds `bytes` from time t on.
  void sample_reorder_buffer(SimTime t, std::int64_t bytes);

  /// Fills the goodput, occupancy, delay and ordering fields of `out`.
  void finalize_into(RunMetrics& out, SimTime end) const;

  std::uint64_t deliveries() const { return delay_us_.size(); }

 private:
  SimTime duration_;
  std::vector<std::int64_t> bits_per_second_;
  std::int64_t total_bits_ = 0;
  std::vector<std::int64_t> delay_us_;
  std::uint64_t ooo_delivered_ = 0;
  std::uint64_t duplicate_discarded_ = 0;

  SimTime occ_last_t_{};
  std::int64_t occ_last_bytes_ = 0;
  long double occ_integral_ = 0.0L;  // byte-microseconds
  std::int64_t occ_max_ = 0;
};

/// Nearest-rank percentile of an ascending sample; empty if no samples.
std::optional<double> percentile(const std::vector<std::int64_t>& sorted, double p);

// Emission. CSV: schema comment line, header, one `second` row per second and
// one `aggregate` row. JSON: one document per run.
std::string csv_header();
void write_csv(const RunMetrics& m, std::ostream& out, bool include_header = true);
std::string to_csv(const RunMetrics& m);
/// `metadata_json`, if non-empty, must be a JSON object; it is embedded
/// under "metadata" and ignored by metrics_from_json.
std::string to_json(const RunMetrics& m, const std::string& metadata_json = {});
RunMetrics metrics_from_json(const std::string& text);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace mcsim

#endif  // MCSIM_METRICS_HPP
