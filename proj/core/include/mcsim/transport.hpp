// SPDX-License-Identifier: Apache-2.0
//
// Traffic endpoints above PDCP: a constant-bit-rate UDP source and a
// simplified NewReno TCP sender/receiver (one segment per PDCP SDU).

#ifndef MCSIM_TRANSPORT_HPP
#define MCSIM_TRANSPORT_HPP

#include <cstdint>
#include <functional>
#include <set>
#include <string_view>
#include <vector>

#include "mcsim/sim_core.hpp"

namespace mcsim {

/// Jitter-free CBR source. SDU k (k = 1, 2, ...) is emitted at
/// floor(k * sdu_bytes * 8 / rate_bps) microseconds, so exactly
/// floor(T / interval) SDUs fall in (0, T].
class UdpSource {
 public:
  using SubmitFn = std::function<void(std::int32_t size_bytes)>;

  UdpSource(Simulator& sim, std::uint64_t rate_bps, std::int32_t sdu_bytes, SimTime stop_at,
            std::uint64_t max_sdus, SubmitFn submit);

  void start();

  /// Emission time of the k-th SDU (k >= 1).
  SimTime tick_time(std::uint64_t k) const;
  double interval_us() const;
  std::uint64_t submitted() const { return submitted_; }

 private:
  void schedule_next();

  Simulator& sim_;
  std::uint64_t rate_bps_;
  std::int32_t sdu_bytes_;
  SimTime stop_at_;
  std::uint64_t max_sdus_;  // 0 = unlimited
  SubmitFn submit_;
  std::uint64_t submitted_ = 0;
};

enum class TcpPhase { kSlowStart, kCongestionAvoidance, kFastRecovery };

std::string_view to_string(TcpPhase phase);

struct TcpParams {
  double initial_cwnd = 10.0;
  SimTime initial_rto = SimTime::ms(200);
  SimTime min_rto = SimTime::ms(200);
  SimTime max_rto = SimTime::sec(60);
  std::uint64_t rwnd_segments = std::uint64_t{1} << 20;
  double initial_ssthresh = 64.0;  // segments
};

struct TcpCounters {
  std::uint64_t segments_sent = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t fast_retransmits = 0;
  std::uint64_t rto_events = 0;
  std::uint64_t dup_acks = 0;
};

/// Saturated NewReno sender counting in whole segments. Sends through a
/// callback; the caller feeds cumulative ACKs back with on_ack().
class TcpSender {
 public:
  using SendFn = std::function<void(std::uint64_t segment, bool retransmission)>;

  TcpSender(Simulator& sim, TcpParams params, SendFn send);
  TcpSender(const TcpSender&) = delete;
  TcpSender& operator=(const TcpSender&) = delete;

  /// Sends the initial window.
  void start();

  /// `ack` is the next segment the receiver expects.
  void on_ack(std::uint64_t ack);
  /// Retransmission timeout; fired by the internal timer, public for tests.
  void on_rto();

  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }
  TcpPhase phase() const { return phase_; }
  std::uint64_t snd_una() const { return snd_una_; }
  std::uint64_t snd_nxt() const { return snd_nxt_; }
  std::uint64_t high_sent() const { return high_sent_; }
  std::uint64_t flight() const { return snd_nxt_ - snd_una_; }
  std::uint32_t dupack_count() const { return dupacks_; }
  SimTime rto() const { return rto_; }
  SimTime srtt() const { return srtt_; }
  bool rto_timer_running() const { return rto_timer_.valid(); }
  const TcpCounters& counters() const { return counters_; }

 private:
  void send_segment(std::uint64_t seg);
  void try_send();
  void retransmit_head();
  void restart_rto_timer();
  void stop_rto_timer();
  void take_rtt_sample(std::uint64_t ack);
  std::uint64_t window() const;

  Simulator& sim_;
  TcpParams params_;
  SendFn send_;

  double cwnd_;
  double ssthresh_;
  TcpPhase phase_ = TcpPhase::kSlowStart;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t high_sent_ = 0;  // one past the highest segment ever sent
  std::int64_t recover_ = -1;
  std::uint32_t dupacks_ = 0;
  bool partial_ack_seen_ = false;

  SimTime rto_;
  SimTime srtt_{};
  SimTime rttvar_{};
  bool have_rtt_ = false;
  EventHandle rto_timer_;

  struct SendRecord {
    SimTime sent_at{};
    bool retransmitted = false;
  };
  std::vector<SendRecord> sends_;  // indexed by segment
  TcpCounters counters_;
};

struct TcpDelivery {
  std::uint64_t ack = 0;          // cumulative ACK to send back
  std::uint64_t first_new = 0;    // newly in-order segments: [first_new, ack)
  bool duplicate_ack = false;
};

/// Cumulative-ACK receiver: one ACK per arriving segment.
class TcpReceiver {
 public:
  TcpDelivery on_segment(std::uint64_t segment);

  std::uint64_t rcv_nxt() const { return rcv_nxt_; }
  std::size_t out_of_order_held() const { return ooo_.size(); }

 private:
  std::uint64_t rcv_nxt_ = 0;
  std::set<std::uint64_t> ooo_;
};

}  // namespace mcsim

#endif  // MCSIM_TRANSPORT_HPP
