// SPDX-License-Identifier: Apache-2.0

#include "mcsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

namespace mcsim {

namespace {

// Spectral efficiency per CQI index (4-bit CQI table, 64QAM).
constexpr std::array<double, 16> kLteCqiEfficiency = {
    0.0,    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
    1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

[[noreturn]] void fail(const std::string& label, std::size_t line, const std::string& what) {
  std::ostringstream os;
  if (!label.empty()) os << label << ": ";
  os << "line " << line << ": " << what;
  throw TraceError(os.str());
}

}  // namespace

int ChannelTrace::cqi_at_second(std::int64_t second) const {
  if (cqi.empty()) return 0;
  const auto n = static_cast<std::int64_t>(cqi.size());
  return cqi[static_cast<std::size_t>(((second % n) + n) % n)];
}

CqiRateTable CqiRateTable::lte_default() {
  std::array<double, kMaxCqi + 1> e{};
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = kLteCqiEfficiency[i] / kLteCqiEfficiency[15];
  return CqiRateTable(e);
}

CqiRateTable::CqiRateTable(const std::array<double, kMaxCqi + 1>& entries) : entries_(entries) {
  if (entries_[0] != 0.0) throw TraceError("rate table: entry for cqi 0 must be 0");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i] >= entries_[i - 1])) {
      throw TraceError("rate table: not monotone at cqi " + std::to_string(i));
    }
  }
}

ChannelTrace parse_trace(const std::string& text, std::string label) {
  ChannelTrace trace;
  trace.label = std::move(label);
  trace.has_header = false;
  std::string_view rest(text);
  std::size_t line_no = 0;
  bool saw_row = false;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) fail(trace.label, line_no, "expected `second,cqi`");
    const auto first = trim(line.substr(0, comma));
    const auto second = trim(line.substr(comma + 1));
    if (!saw_row && line_no == 1 && first == "second" && second == "cqi") {
      trace.has_header = true;
      continue;
    }
    long long sec = 0;
    long long cqi = 0;
    if (!parse_int(first, sec) || !parse_int(second, cqi)) {
      fail(trace.label, line_no, "malformed row `" + std::string(line) + "`");
    }
    if (cqi < 0 || cqi > CqiRateTable::kMaxCqi) {
      fail(trace.label, line_no, "cqi " + std::to_string(cqi) + " out of range [0, 15]");
    }
    if (sec != static_cast<long long>(trace.cqi.size())) {
      fail(trace.label, line_no,
           "second " + std::to_string(sec) + " out of sequence (expected " +
               std::to_string(trace.cqi.size()) + ")");
    }
    trace.cqi.push_back(static_cast<int>(cqi));
    saw_row = true;
  }
  if (trace.cqi.empty()) fail(trace.label, line_no, "trace has no samples");
  return trace;
}

ChannelTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError(path.string() + ": cannot open trace file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), path.string());
}

std::string serialize_trace(const ChannelTrace& trace) {
  std::string out;
  if (trace.has_header) out += "second,cqi\n";
  for (std::size_t i = 0; i < trace.cqi.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += std::to_string(trace.cqi[i]);
    out += '\n';
  }
  return out;
}

void save_trace(const ChannelTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError(path.string() + ": cannot write trace file");
  out << serialize_trace(trace);
}

double rate_at(const ChannelTrace& trace, const CqiRateTable& table, double peak_rate_bps,
               SimTime t) {
  return peak_rate_bps * table.normalized(trace.cqi_at_second(t.whole_seconds()));
}

double mean_normalized_rate(const ChannelTrace& trace, const CqiRateTable& table,
                            std::int64_t seconds) {
  if (seconds <= 0) return 0.0;
  double sum = 0.0;
  for (std::int64_t s = 0; s < seconds; ++s) sum += table.normalized(trace.cqi_at_second(s));
  return sum / static_cast<double>(seconds);
}

double integrated_capacity_bits(const ChannelTrace& trace, const CqiRateTable& table,
                                double peak_rate_bps, SimTime duration) {
  double bits = 0.0;
  const std::int64_t full = duration.whole_seconds();
  for (std::int64_t s = 0; s < full; ++s) {
    bits += peak_rate_bps * table.normalized(trace.cqi_at_second(s));
  }
  const double frac = duration.seconds() - static_cast<double>(full);
  if (frac > 0.0) bits += frac * peak_rate_bps * table.normalized(trace.cqi_at_second(full));
  return bits;
}

std::optional<std::int64_t> next_nonzero_second(const ChannelTrace& trace,
                                                const CqiRateTable& table,
                                                std::int64_t from_second) {
  const auto n = static_cast<std::int64_t>(trace.size());
  for (std::int64_t k = 0; k < n; ++k) {
    if (table.normalized(trace.cqi_at_second(from_second + k)) > 0.0) return from_second + k;
  }
  return std::nullopt;
}

ChannelTrace generate_random_walk(const RandomWalkParams& params) {
  if (params.seconds <= 0) throw TraceError("random walk: seconds must be positive");
  if (params.min_cqi < 0 || params.max_cqi > CqiRateTable::kMaxCqi ||
      params.min_cqi > params.max_cqi) {
    throw TraceError("random walk: invalid cqi bounds");
  }
  RandomStream rng = RandomStream::derive(params.seed, "trace/random-walk");
  ChannelTrace trace;
  trace.label = "random-walk seed=" + std::to_string(params.seed);
  int cqi = std::clamp(params.start_cqi, params.min_cqi, params.max_cqi);
  for (int s = 0; s < params.seconds; ++s) {
    trace.cqi.push_back(cqi);
    const int step = static_cast<int>(rng.below(3)) - 1;
    cqi = std::clamp(cqi + step, params.min_cqi, params.max_cqi);
  }
  return trace;
}

TraceManifest summarize(const ChannelTrace& trace, const CqiRateTable& table) {
  TraceManifest m;
  m.samples = trace.size();
  if (trace.cqi.empty()) return m;
  m.min_cqi = *std::min_element(trace.cqi.begin(), trace.cqi.end());
  m.max_cqi = *std::max_element(trace.cqi.begin(), trace.cqi.end());
  m.mean_cqi = std::accumulate(trace.cqi.begin(), trace.cqi.end(), 0.0) /
               static_cast<double>(trace.size());
  m.mean_normalized_rate =
      mean_normalized_rate(trace, table, static_cast<std::int64_t>(trace.size()));
  return m;
}

}  // namespace mcsim
