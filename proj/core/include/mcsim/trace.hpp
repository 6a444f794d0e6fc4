// SPDX-License-Identifier: Apache-2.0
//
// Per-second CQI traces and their mapping to link capacity.

#ifndef MCSIM_TRACE_HPP
#define MCSIM_TRACE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsim/sim_core.hpp"

namespace mcsim {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One CQI value per second, second-index 0..size()-1. Wraps cyclically.
struct ChannelTrace {
  std::vector<int> cqi;
  std::string label;
  bool has_header = true;

  std::size_t size() const { return cqi.size(); }
  int cqi_at_second(std::int64_t second) const;
  bool operator==(const ChannelTrace&) const = default;
};

/// Maps CQI to a normalized rate in [0, 1]; table(0) = 0, table(15) = 1.
class CqiRateTable {
 public:
  static constexpr int kMaxCqi = 15;

  /// LTE 4-bit CQI spectral-efficiency ladder (bits per symbol), normalized.
  static CqiRateTable lte_default();
  /// Throws TraceError unless monotone non-decreasing with entry 0 == 0.
  explicit CqiRateTable(const std::array<double, kMaxCqi + 1>& entries);

  double normalized(int cqi) const { return entries_.at(static_cast<std::size_t>(cqi)); }

 private:
  std::array<double, kMaxCqi + 1> entries_;
};

/// Parses `second,cqi` rows (optional header, LF endings). Errors name the line.
ChannelTrace parse_trace(const std::string& text, std::string label = {});
ChannelTrace load_trace(const std::filesystem::path& path);
/// One `second,cqi` row per sample, preceded by the header if has_header.
std::string serialize_trace(const ChannelTrace& trace);
void save_trace(const ChannelTrace& trace, const std::filesystem::path& path);

/// Capacity in bit/s at time t: peak_rate_bps * table(cqi of floor(t)).
double rate_at(const ChannelTrace& trace, const CqiRateTable& table, double peak_rate_bps,
               SimTime t);

/// Mean of table(cqi) over the first `seconds` seconds (wrapping).
double mean_normalized_rate(const ChannelTrace& trace, const CqiRateTable& table,
                            std::int64_t seconds);

/// Integral of rate_at over [0, duration], in bits.
double integrated_capacity_bits(const ChannelTrace& trace, const CqiRateTable& table,
                                double peak_rate_bps, SimTime duration);

/// First whole second >= from_second with nonzero rate, if any exists.
std::optional<std::int64_t> next_nonzero_second(const ChannelTrace& trace,
                                                const CqiRateTable& table,
                                                std::int64_t from_second);

struct RandomWalkParams {
  std::uint64_t seed = 1;
  int seconds = 30;
  int start_cqi = 12;
  int min_cqi = 6;
  int max_cqi = 15;
};

/// Pedestrian-like trace: each second the CQI moves -1, 0 or +1 with equal
/// probability, clamped to [min_cqi, max_cqi].
ChannelTrace generate_random_walk(const RandomWalkParams& params);

struct TraceManifest {
  std::size_t samples = 0;
  int min_cqi = 0;
  int max_cqi = 0;
  double mean_cqi = 0.0;
  double mean_normalized_rate = 0.0;
};

TraceManifest summarize(const ChannelTrace& trace, const CqiRateTable& table);

}  // namespace mcsim

#endif  // MCSIM_TRACE_HPP
