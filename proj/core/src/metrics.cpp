// SPDX-License-Identifier: Apache-2.0

#include "mcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mcsim {

using ojson = nlohmann::ordered_json;

double round_sig6(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::strtod(buf, nullptr);
}

std::optional<double> relative_gain(double a, double b) {
  if (!(b > 0.0)) return std::nullopt;
  return 100.0 * (a - b) / b;
}

MetricsCollector::MetricsCollector(SimTime duration) : duration_(duration) {
  const auto seconds = (duration.micros + 999999) / 1000000;
  bits_per_second_.assign(static_cast<std::size_t>(std::max<std::int64_t>(seconds, 0)), 0);
}

void MetricsCollector::record_delivery(std::int32_t bytes, SimTime created_at,
                                       SimTime delivered_at, bool in_order) {
  if (delivered_at < created_at) {
    throw std::logic_error("record_delivery: delivered_at precedes created_at");
  }
  const std::int64_t bits = std::int64_t{bytes} * 8;
  total_bits_ += bits;
  if (!bits_per_second_.empty()) {
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(delivered_at.whole_seconds()),
                                           bits_per_second_.size() - 1);
    bits_per_second_[idx] += bits;
  }
  delay_us_.push_back((delivered_at - created_at).micros);
  if (!in_order) ++ooo_delivered_;
}

void MetricsCollector::sample_reorder_buffer(SimTime t, std::int64_t bytes) {
  if (t > occ_last_t_) {
    occ_integral_ += static_cast<long double>(occ_last_bytes_) *
                     static_cast<long double>((t - occ_last_t_).micros);
    occ_last_t_ = t;
  }
  occ_last_bytes_ = bytes;
  occ_max_ = std::max(occ_max_, bytes);
}

std::optional<double> percentile(const std::vector<std::int64_t>& sorted, double p) {
  if (sorted.empty()) return std::nullopt;
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return static_cast<double>(sorted[rank - 1]);
}

void MetricsCollector::finalize_into(RunMetrics& out, SimTime end) const {
  out.duration_s = round_sig6(duration_.seconds());
  out.goodput_bps.clear();
  for (std::int64_t bits : bits_per_second_) {
    out.goodput_bps.push_back(round_sig6(static_cast<double>(bits)));
  }
  out.mean_goodput_bps =
      duration_.micros > 0 ? round_sig6(static_cast<double>(total_bits_) / duration_.seconds()) : 0.0;
  out.ooo_delivered = ooo_delivered_;
  out.duplicate_discarded = duplicate_discarded_;

  long double integral = occ_integral_;
  if (end > occ_last_t_) {
    integral += static_cast<long double>(occ_last_bytes_) *
                static_cast<long double>((end - occ_last_t_).micros);
  }
  out.reorder_mean_bytes =
      end.micros > 0 ? round_sig6(static_cast<double>(integral / end.micros)) : 0.0;
  out.reorder_max_bytes = occ_max_;

  std::vector<std::int64_t> sorted = delay_us_;
  std::sort(sorted.begin(), sorted.end());
  auto to_ms = [](std::optional<double> us) -> std::optional<double> {
    if (!us) return std::nullopt;
    return round_sig6(*us / 1000.0);
  };
  out.delay_p50_ms = to_ms(percentile(sorted, 0.50));
  out.delay_p95_ms = to_ms(percentile(sorted, 0.95));
  out.delay_p99_ms = to_ms(percentile(sorted, 0.99));
}

namespace {

std::string g6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string opt_g6(const std::optional<double>& x) { return x ? g6(*x) : std::string{}; }

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += fmt(v[i]);
  }
  return s;
}

constexpr const char* kColumns[] = {
    "run_key",          "kind",
    "second",           "goodput_bps",
    "path_radio_bps",   "path_queue_bytes",
    "duration_s",       "mean_goodput_bps",
    "capacity_bits",    "submitted",
    "delivered",        "declared_lost",
    "stale_discarded",  "path_dropped",
    "residual",         "ooo_delivered",
    "duplicate_discarded", "reorder_mean_bytes",
    "reorder_max_bytes",   "delay_p50_ms",
    "delay_p95_ms",     "delay_p99_ms",
    "tcp_retransmissions", "tcp_fast_retransmits",
    "tcp_rto_events",   "events_processed",
    "trace_digest",     "path_ids",
    "path_enqueued",    "path_dequeued",
    "path_dropped_overflow", "path_dropped_loss",
    "path_bytes_sent",  "path_capacity_bits",
};
constexpr std::size_t kColumnCount = std::size(kColumns);

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i) out << ',';
    if (i < cells.size()) out << cells[i];
  }
  out << '\n';
}

}  // namespace

std::string csv_header() {
  std::string h = "# mcsim-metrics schema_version=" + std::to_string(kMetricsSchemaVersion) + "\n";
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i) h += ',';
    h += kColumns[i];
  }
  h += '\n';
  return h;
}

void write_csv(const RunMetrics& m, std::ostream& out, bool include_header) {
  if (include_header) out << csv_header();
  if (m.duration_s <= 0.0) return;
  for (std::size_t s = 0; s < m.goodput_bps.size(); ++s) {
    std::string radio;
    std::string queue;
    for (std::size_t p = 0; p < m.paths.size(); ++p) {
      if (p) {
        radio += ';';
        queue += ';';
      }
      const auto& pr = m.paths[p];
      radio += g6(s < pr.radio_bps.size() ? pr.radio_bps[s] : 0.0);
      queue += std::to_string(s < pr.queue_bytes.size() ? pr.queue_bytes[s] : 0);
    }
    write_row(out, {m.run_key, "second", std::to_string(s), g6(m.goodput_bps[s]), radio, queue});
  }
  auto u = [](std::uint64_t v) { return std::to_string(v); };
  auto paths_field = [&](auto&& get) {
    return join(m.paths, [&](const PathReport& p) { return get(p); });
  };
  write_row(out, {m.run_key,
                  "aggregate",
                  "",
                  "",
                  "",
                  "",
                  g6(m.duration_s),
                  g6(m.mean_goodput_bps),
                  g6(m.capacity_bits),
                  u(m.submitted),
                  u(m.delivered),
                  u(m.declared_lost),
                  u(m.stale_discarded),
                  u(m.path_dropped),
                  u(m.residual),
                  u(m.ooo_delivered),
                  u(m.duplicate_discarded),
                  g6(m.reorder_mean_bytes),
                  std::to_string(m.reorder_max_bytes),
                  opt_g6(m.delay_p50_ms),
                  opt_g6(m.delay_p95_ms),
                  opt_g6(m.delay_p99_ms),
                  u(m.tcp_retransmissions),
                  u(m.tcp_fast_retransmits),
                  u(m.tcp_rto_events),
                  u(m.events_processed),
                  m.trace_digest,
                  paths_field([](const PathReport& p) { return p.id; }),
                  paths_field([&](const PathReport& p) { return u(p.enqueued); }),
                  paths_field([&](const PathReport& p) { return u(p.dequeued); }),
                  paths_field([&](const PathReport& p) { return u(p.dropped_overflow); }),
                  paths_field([&](const PathReport& p) { return u(p.dropped_loss); }),
                  paths_field([](const PathReport& p) { return std::to_string(p.bytes_sent); }),
                  paths_field([](const PathReport& p) { return g6(p.capacity_bits); })});
}

std::string to_csv(const RunMetrics& m) {
  std::ostringstream os;
  write_csv(m, os);
  return os.str();
}

namespace {

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_from(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string to_json(const RunMetrics& m, const std::string& metadata_json) {
  ojson j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["run_key"] = m.run_key;
  if (!metadata_json.empty()) j["metadata"] = ojson::parse(metadata_json);
  ojson mj;
  mj["duration_s"] = m.duration_s;
  mj["mean_goodput_bps"] = m.mean_goodput_bps;
  mj["capacity_bits"] = m.capacity_bits;
  mj["goodput_bps"] = m.goodput_bps;
  mj["submitted"] = m.submitted;
  mj["delivered"] = m.delivered;
  mj["declared_lost"] = m.declared_lost;
  mj["stale_discarded"] = m.stale_discarded;
  mj["path_dropped"] = m.path_dropped;
  mj["residual"] = m.residual;
  mj["ooo_delivered"] = m.ooo_delivered;
  mj["duplicate_discarded"] = m.duplicate_discarded;
  mj["reorder_mean_bytes"] = m.reorder_mean_bytes;
  mj["reorder_max_bytes"] = m.reorder_max_bytes;
  mj["delay_p50_ms"] = opt_json(m.delay_p50_ms);
  mj["delay_p95_ms"] = opt_json(m.delay_p95_ms);
  mj["delay_p99_ms"] = opt_json(m.delay_p99_ms);
  mj["tcp_retransmissions"] = m.tcp_retransmissions;
  mj["tcp_fast_retransmits"] = m.tcp_fast_retransmits;
  mj["tcp_rto_events"] = m.tcp_rto_events;
  mj["events_processed"] = m.events_processed;
  mj["trace_digest"] = m.trace_digest;
  ojson paths = ojson::array();
  for (const auto& p : m.paths) {
    ojson pj;
    pj["id"] = p.id;
    pj["enqueued"] = p.enqueued;
    pj["dequeued"] = p.dequeued;
    pj["dropped_overflow"] = p.dropped_overflow;
    pj["dropped_loss"] = p.dropped_loss;
    pj["bytes_sent"] = p.bytes_sent;
    pj["capacity_bits"] = p.capacity_bits;
    pj["radio_bps"] = p.radio_bps;
    pj["queue_bytes"] = p.queue_bytes;
    paths.push_back(std::move(pj));
  }
  mj["paths"] = std::move(paths);
  j["metrics"] = std::move(mj);
  return j.dump(2) + "\n";
}

RunMetrics metrics_from_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  if (j.at("schema_version").get<int>() != kMetricsSchemaVersion) {
    throw std::runtime_error("metrics JSON: unsupported schema_version");
  }
  RunMetrics m;
  m.run_key = j.at("run_key").get<std::string>();
  const ojson& mj = j.at("metrics");
  m.duration_s = mj.at("duration_s").get<double>();
  m.mean_goodput_bps = mj.at("mean_goodput_bps").get<double>();
  m.capacity_bits = mj.at("capacity_bits").get<double>();
  m.goodput_bps = mj.at("goodput_bps").get<std::vector<double>>();
  m.submitted = mj.at("submitted").get<std::uint64_t>();
  m.delivered = mj.at("delivered").get<std::uint64_t>();
  m.declared_lost = mj.at("declared_lost").get<std::uint64_t>();
  m.stale_discarded = mj.at("stale_discarded").get<std::uint64_t>();
  m.path_dropped = mj.at("path_dropped").get<std::uint64_t>();
  m.residual = mj.at("residual").get<std::uint64_t>();
  m.ooo_delivered = mj.at("ooo_delivered").get<std::uint64_t>();
  m.duplicate_discarded = mj.at("duplicate_discarded").get<std::uint64_t>();
  m.reorder_mean_bytes = mj.at("reorder_mean_bytes").get<double>();
  m.reorder_max_bytes = mj.at("reorder_max_bytes").get<std::int64_t>();
  m.delay_p50_ms = opt_from(mj.at("delay_p50_ms"));
  m.delay_p95_ms = opt_from(mj.at("delay_p95_ms"));
  m.delay_p99_ms = opt_from(mj.at("delay_p99_ms"));
  m.tcp_retransmissions = mj.at("tcp_retransmissions").get<std::uint64_t>();
  m.tcp_fast_retransmits = mj.at("tcp_fast_retransmits").get<std::uint64_t>();
  m.tcp_rto_events = mj.at("tcp_rto_events").get<std::uint64_t>();
  m.events_processed = mj.at("events_processed").get<std::uint64_t>();
  m.trace_digest = mj.at("trace_digest").get<std::string>();
  for (const auto& pj : mj.at("paths")) {
    PathReport p;
    p.id = pj.at("id").get<std::string>();
    p.enqueued = pj.at("enqueued").get<std::uint64_t>();
    p.dequeued = pj.at("dequeued").get<std::uint64_t>();
    p.dropped_overflow = pj.at("dropped_overflow").get<std::uint64_t>();
    p.dropped_loss = pj.at("dropped_loss").get<std::uint64_t>();
    p.bytes_sent = pj.at("bytes_sent").get<std::int64_t>();
    p.capacity_bits = pj.at("capacity_bits").get<double>();
    p.radio_bps = pj.at("radio_bps").get<std::vector<double>>();
    p.queue_bytes = pj.at("queue_bytes").get<std::vector<std::int64_t>>();
    m.paths.push_back(std::move(p));
  }
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(path.string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << contents;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace mcsim
