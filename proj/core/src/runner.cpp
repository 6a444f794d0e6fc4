// SPDX-License-Identifier: Apache-2.0

#include "mcsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mcsim/pdcp_rx.hpp"
#include "mcsim/pdcp_tx.hpp"
#include "mcsim/radio_path.hpp"
#include "mcsim/transport.hpp"

namespace mcsim {

namespace {

SimTime from_ms(double ms) { return SimTime::from_seconds(ms / 1000.0); }

// Per-SDU bookkeeping used to classify every SDU's fate at run end.
struct SduRecord {
  std::uint64_t segment = 0;
  SimTime created_at{};
  std::int32_t bytes = 0;
  std::int32_t outstanding = 0;  // accepted copies not yet lost or arrived
  bool delivered = false;
  bool stale = false;
  bool skipped = false;
};

class SimulationRun {
 public:
  SimulationRun(const ScenarioConfig& cfg, std::string key)
      : cfg_(cfg),
        key_(std::move(key)),
        duration_(SimTime::from_seconds(cfg.duration_s)),
        table_(CqiRateTable::lte_default()),
        metrics_(duration_) {
    for (std::size_t i = 0; i < cfg_.paths.size(); ++i) {
      const PathConfig& pc = cfg_.paths[i];
      PathParams pp;
      pp.id = pc.id;
      pp.trace = pc.trace;
      pp.peak_rate_bps = pc.peak_rate_mbps * 1e6;
      pp.backhaul_delay = from_ms(pc.backhaul_delay_ms);
      pp.prop_delay = from_ms(pc.prop_delay_ms);
      pp.queue_limit_bytes = std::int64_t{pc.queue_limit_pdus} * cfg_.traffic.sdu_bytes;
      pp.loss_prob = pc.loss_prob;
      validate(pp, cfg_.traffic.sdu_bytes);
      auto path = std::make_unique<RadioPath>(sim_, static_cast<std::uint32_t>(i), std::move(pp), table_,
                                              RandomStream::derive(cfg_.seed, "loss/" + pc.id));
      path->on_arrival([this](const PdcpPdu& pdu) { on_path_arrival(pdu); });
      path->on_loss([this](const PdcpPdu& pdu) { on_path_loss(pdu); });
      paths_.push_back(std::move(path));
    }
    std::vector<RadioPath*> raw;
    for (auto& p : paths_) raw.push_back(p.get());
    tx_ = std::make_unique<PdcpTransmitter>(sim_, cfg_.sn_len, cfg_.policy, std::move(raw),
                                            from_ms(cfg_.feedback_delay_ms));
    rx_ = std::make_unique<PdcpReceiver>(
        sim_, RxConfig{cfg_.sn_len, cfg_.reordering, from_ms(cfg_.t_reordering_ms)});
    rx_->on_expiry([this](const DeliveryBatch& b) { handle_batch(b); });

    if (cfg_.traffic.type == TrafficType::kUdp) {
      const SimTime stop = cfg_.traffic.stop_s > 0.0
                               ? std::min(SimTime::from_seconds(cfg_.traffic.stop_s), duration_)
                               : duration_;
      udp_ = std::make_unique<UdpSource>(
          sim_, static_cast<std::uint64_t>(std::llround(cfg_.traffic.udp_rate_mbps * 1e6)),
          cfg_.traffic.sdu_bytes, stop, cfg_.traffic.max_sdus,
          [this](std::int32_t bytes) { submit(bytes, 0); });
    } else {
      TcpParams tp;
      tp.initial_cwnd = cfg_.tcp.initial_cwnd;
      tp.initial_ssthresh = cfg_.tcp.initial_ssthresh;
      tp.initial_rto = from_ms(cfg_.tcp.initial_rto_ms);
      tp.min_rto = from_ms(cfg_.tcp.min_rto_ms);
      tp.max_rto = from_ms(cfg_.tcp.max_rto_ms);
      tp.rwnd_segments = cfg_.tcp.rwnd_segments;
      tcp_tx_ = std::make_unique<TcpSender>(sim_, tp, [this](std::uint64_t seg, bool) {
        if (segment_first_sent_.size() <= seg) segment_first_sent_.resize(seg + 1, sim_.now());
        submit(cfg_.traffic.sdu_bytes, seg);
      });
    }

    sim_.set_observer([this](SimTime t, std::uint64_t seq, EventKind kind, std::uint32_t target) {
      mix(static_cast<std::uint64_t>(t.micros));
      mix(seq);
      mix(static_cast<std::uint64_t>(kind));
      mix(target);
    });
  }

  RunMetrics run() {
    metrics_.sample_reorder_buffer(SimTime{}, 0);
    for (std::int64_t s = 1; SimTime::sec(s) <= duration_; ++s) {
      sim_.schedule(SimTime::sec(s), EventKind::kTraceAdvance, kSamplerTarget, [this] {
        for (auto& p : paths_) p->sample_queue();
      });
    }
    if (udp_) udp_->start();
    if (tcp_tx_) tcp_tx_->start();
    const RunSummary summary = sim_.run_until(duration_);
    return collect(summary);
  }

 private:
  static constexpr std::uint32_t kSamplerTarget = 1000;

  void mix(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      digest_ ^= (v >> (8 * i)) & 0xff;
      digest_ *= 0x100000001b3ULL;
    }
  }

  void submit(std::int32_t bytes, std::uint64_t segment) {
    const std::uint64_t sdu_id = sdus_.size();
    sdus_.push_back(SduRecord{segment, sim_.now(), bytes, 0, false, false, false});
    const SubmitResult r = tx_->submit_sdu(sdu_id, bytes);
    if (r.pdu.count != sdu_id) throw std::logic_error("COUNT and SDU id diverged");
    sdus_[sdu_id].outstanding = static_cast<std::int32_t>(
        std::count(r.accepted.begin(), r.accepted.end(), true));
  }

  void on_path_loss(const PdcpPdu& pdu) { --sdus_.at(pdu.count).outstanding; }

  void on_path_arrival(const PdcpPdu& pdu) {
    SduRecord& rec = sdus_.at(pdu.count);
    --rec.outstanding;
    const auto recovered = rx_->recover_count(pdu.sn);
    if (!recovered || *recovered != pdu.count) {
      throw std::runtime_error(
          "COUNT recovery failed for COUNT " + std::to_string(pdu.count) +
          ": reordering span exceeds half the SN space; use a larger sn_len");
    }
    const ReceiveResult r = rx_->receive_pdu(pdu);
    if (r.outcome == RxOutcome::kDuplicate) metrics_.record_duplicate();
    if (r.outcome == RxOutcome::kStale && !rec.delivered) rec.stale = true;
    handle_batch(r.batch);
  }

  void handle_batch(const DeliveryBatch& batch) {
    for (std::uint64_t c : batch.declared_lost) sdus_.at(c).skipped = true;
    for (const DeliveredSdu& d : batch.delivered) {
      SduRecord& rec = sdus_.at(d.count);
      rec.delivered = true;
      if (udp_) {
        metrics_.record_delivery(d.size_bytes, d.created_at, d.delivered_at, d.in_order);
      } else {
        if (!d.in_order) metrics_.record_out_of_order();
        deliver_to_tcp(rec.segment);
      }
    }
    metrics_.sample_reorder_buffer(sim_.now(), rx_->reorder_buffer_occupancy().bytes);
  }

  void deliver_to_tcp(std::uint64_t segment) {
    const TcpDelivery d = tcp_rx_.on_segment(segment);
    for (std::uint64_t s = d.first_new; s < d.ack; ++s) {
      metrics_.record_delivery(cfg_.traffic.sdu_bytes, segment_first_sent_.at(s), sim_.now(), true);
    }
    const std::uint64_t ack = d.ack;
    sim_.schedule_in(from_ms(cfg_.tcp.uplink_delay_ms), EventKind::kAckArrival, 0,
                     [this, ack] { tcp_tx_->on_ack(ack); });
  }

  RunMetrics collect(const RunSummary& summary) {
    RunMetrics m;
    m.run_key = key_;
    metrics_.finalize_into(m, duration_);
    m.submitted = tx_->next_count();
    m.delivered = rx_->counters().delivered;
    for (std::uint64_t c = 0; c < sdus_.size(); ++c) {
      const SduRecord& rec = sdus_[c];
      if (rec.delivered) continue;
      if (rec.stale) {
        ++m.stale_discarded;
      } else if (rec.outstanding > 0 || rx_->is_buffered(c)) {
        ++m.residual;
      } else if (rec.skipped) {
        ++m.declared_lost;
      } else {
        ++m.path_dropped;
      }
    }
    if (tcp_tx_) {
      m.tcp_retransmissions = tcp_tx_->counters().retransmissions;
      m.tcp_fast_retransmits = tcp_tx_->counters().fast_retransmits;
      m.tcp_rto_events = tcp_tx_->counters().rto_events;
    }
    m.events_processed = summary.events_processed;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest_));
    m.trace_digest = hex;

    const std::size_t seconds = m.goodput_bps.size();
    double capacity = 0.0;
    for (auto& p : paths_) {
      const PathStats& st = p->stats();
      PathReport r;
      r.id = p->params().id;
      r.enqueued = st.enqueued;
      r.dequeued = st.dequeued;
      r.dropped_overflow = st.dropped_overflow;
      r.dropped_loss = st.dropped_loss;
      r.bytes_sent = st.bytes_sent;
      const double cap = integrated_capacity_bits(p->params().trace, table_,
                                                  p->params().peak_rate_bps, duration_);
      capacity += cap;
      r.capacity_bits = round_sig6(cap);
      for (std::size_t s = 0; s < seconds; ++s) {
        const std::int64_t bits = s < st.bits_sent_per_second.size() ? st.bits_sent_per_second[s] : 0;
        r.radio_bps.push_back(round_sig6(static_cast<double>(bits)));
      }
      r.queue_bytes = st.queue_bytes_samples;
      if (r.queue_bytes.size() < seconds) r.queue_bytes.resize(seconds, p->queue_bytes());
      r.queue_bytes.resize(seconds);
      m.paths.push_back(std::move(r));
    }
    m.capacity_bits = round_sig6(capacity);
    return m;
  }

  ScenarioConfig cfg_;
  std::string key_;
  SimTime duration_;
  CqiRateTable table_;
  Simulator sim_;
  MetricsCollector metrics_;
  std::vector<std::unique_ptr<RadioPath>> paths_;
  std::unique_ptr<PdcpTransmitter> tx_;
  std::unique_ptr<PdcpReceiver> rx_;
  std::unique_ptr<UdpSource> udp_;
  std::unique_ptr<TcpSender> tcp_tx_;
  TcpReceiver tcp_rx_;
  std::vector<SimTime> segment_first_sent_;
  std::vector<SduRecord> sdus_;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
};

}  // namespace

RunMetrics run_scenario(const ScenarioConfig& cfg, const std::string& run_key) {
  ScenarioConfig checked = cfg;
  validate(checked);
  SimulationRun run(checked, run_key.empty() ? checked.name : run_key);
  return run.run();
}

std::string run_metadata_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(serialize_config(cfg));
  j["policy_origin"] = cfg.policy == FlowPolicy::kQueueAware ? "extension" : "baseline";
  j["rng"] = RandomStream::kAlgorithm;
  return j.dump();
}

std::vector<std::filesystem::path> write_run_outputs(const RunMetrics& m, const ScenarioConfig& cfg,
                                                     const std::filesystem::path& dir,
                                                     const std::string& format) {
  std::vector<std::filesystem::path> written;
  if (format == "csv" || format == "both") {
    written.push_back(dir / (m.run_key + ".csv"));
    write_file(written.back(), to_csv(m));
  }
  if (format == "json" || format == "both") {
    written.push_back(dir / (m.run_key + ".json"));
    write_file(written.back(), to_json(m, run_metadata_json(cfg)));
  }
  return written;
}

std::vector<RunOutcome> run_matrix(const std::vector<ExpandedRun>& runs, unsigned parallelism) {
  std::vector<RunOutcome> outcomes(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      RunOutcome& o = outcomes[i];
      o.key = runs[i].key;
      o.variant = runs[i].variant;
      o.config = runs[i].config;
      try {
        o.metrics = run_scenario(runs[i].config, runs[i].key);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(runs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return outcomes;
}

std::string summary_csv(const std::vector<RunOutcome>& outcomes, const std::string& baseline) {
  std::ostringstream os;
  os << "# mcsim-summary schema_version=" << kMetricsSchemaVersion << "\n";
  os << "run_key,variant,mode,traffic,t_reordering_ms,seed,mean_goodput_mbps,capacity_mbps,"
        "goodput_over_capacity,gain_vs_baseline_pct,ooo_delivered,declared_lost,stale_discarded,"
        "reorder_mean_bytes,delay_p99_ms,tcp_retransmissions,tcp_rto_events,error\n";
  auto g6 = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  for (const RunOutcome& o : outcomes) {
    os << o.key << ',' << o.variant << ',' << to_string(o.config.mode) << ','
       << to_string(o.config.traffic.type) << ',' << g6(o.config.t_reordering_ms) << ','
       << o.config.seed << ',';
    if (!o.metrics) {
      os << ",,,,,,,,,,," << '"' << o.error << '"' << '\n';
      continue;
    }
    const RunMetrics& m = *o.metrics;
    const double capacity_bps = m.duration_s > 0 ? m.capacity_bits / m.duration_s : 0.0;
    std::optional<double> gain;
    if (!baseline.empty()) {
      for (const RunOutcome& b : outcomes) {
        if (b.variant == baseline && b.metrics && b.config.traffic.type == o.config.traffic.type &&
            b.config.seed == o.config.seed) {
          gain = relative_gain(m.mean_goodput_bps, b.metrics->mean_goodput_bps);
          break;
        }
      }
    }
    os << g6(m.mean_goodput_bps / 1e6) << ',' << g6(capacity_bps / 1e6) << ','
       << g6(capacity_bps > 0 ? m.mean_goodput_bps / capacity_bps : 0.0) << ','
       << (gain ? g6(*gain) : std::string{}) << ',' << m.ooo_delivered << ',' << m.declared_lost
       << ',' << m.stale_discarded << ',' << g6(m.reorder_mean_bytes) << ','
       << (m.delay_p99_ms ? g6(*m.delay_p99_ms) : std::string{}) << ',' << m.tcp_retransmissions
       << ',' << m.tcp_rto_events << ",\n";
  }
  return os.str();
}

}  // namespace mcsim
