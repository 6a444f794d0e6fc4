// SPDX-License-Identifier: Apache-2.0
//
// One radio leg: optional backhaul delay, FIFO transmit queue, trace-driven
// serialization, propagation delay and independent per-PDU loss.

#ifndef MCSIM_RADIO_PATH_HPP
#define MCSIM_RADIO_PATH_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "mcsim/pdu.hpp"
#include "mcsim/sim_core.hpp"
#include "mcsim/trace.hpp"

namespace mcsim {

struct PathParams {
  std::string id;
  ChannelTrace trace;
  double peak_rate_bps = 0.0;
  SimTime backhaul_delay{};
  SimTime prop_delay{};
  std::int64_t queue_limit_bytes = 0;
  double loss_prob = 0.0;
};

/// Throws std::invalid_argument if the parameters break PathModel invariants.
void validate(const PathParams& params, std::int32_t max_pdu_bytes);

struct PathStats {
  std::uint64_t enqueued = 0;  // every enqueue attempt
  std::uint64_t dequeued = 0;  // finished serialization
  std::uint64_t dropped_overflow = 0;
  std::uint64_t dropped_loss = 0;
  std::int64_t bytes_sent = 0;
  std::vector<std::int64_t> bits_sent_per_second;
  std::vector<std::int64_t> queue_bytes_samples;  // sampled at whole seconds
};

class RadioPath {
 public:
  using ArrivalFn = std::function<void(const PdcpPdu&)>;
  using LossFn = std::function<void(const PdcpPdu&)>;

  RadioPath(Simulator& sim, std::uint32_t index, PathParams params, const CqiRateTable& table,
            RandomStream loss_rng);
  RadioPath(const RadioPath&) = delete;
  RadioPath& operator=(const RadioPath&) = delete;

  void on_arrival(ArrivalFn fn) { on_arrival_ = std::move(fn); }
  void on_loss(LossFn fn) { on_loss_ = std::move(fn); }

  /// Accepts the PDU at now() unless it would exceed queue_limit_bytes; PDUs
  /// still crossing the backhaul count toward the limit. A rejected PDU is
  /// counted in dropped_overflow.
  bool enqueue(PdcpPdu pdu);

  /// Bytes held by the path: backhaul transit + FIFO + the PDU on the link.
  std::int64_t queue_bytes() const { return occupancy_bytes_; }
  /// queue_bytes() as it was at time t (t within the history horizon).
  std::int64_t queue_bytes_at(SimTime t) const;
  /// Keeps enough occupancy history to answer queue_bytes_at(now - horizon).
  void set_history_horizon(SimTime horizon) { history_horizon_ = horizon; }

  double rate_bps(SimTime t) const { return rate_at(params_.trace, table_, params_.peak_rate_bps, t); }
  /// Serialization time of `bytes` at `rate_bps`, rounded up to 1 us.
  static SimTime serialization_time(std::int32_t bytes, double rate_bps);

  /// PDUs accepted but not yet serialized (including backhaul transit).
  std::size_t held_pdus() const { return backhaul_pdus_ + fifo_.size(); }
  /// PDUs serialized and propagating toward the receiver.
  std::size_t propagating_pdus() const { return propagating_; }
  bool link_busy() const { return busy_; }

  /// Appends the current queue occupancy to the per-second sample series.
  void sample_queue();

  std::uint32_t index() const { return index_; }
  const PathParams& params() const { return params_; }
  const PathStats& stats() const { return stats_; }

 private:
  void release_from_backhaul(PdcpPdu pdu);
  void try_start();
  void finish_transmission();
  void set_occupancy(std::int64_t bytes);

  Simulator& sim_;
  std::uint32_t index_;
  PathParams params_;
  const CqiRateTable& table_;
  RandomStream loss_rng_;
  ArrivalFn on_arrival_;
  LossFn on_loss_;

  std::deque<PdcpPdu> fifo_;
  std::size_t backhaul_pdus_ = 0;
  std::size_t propagating_ = 0;
  std::int64_t occupancy_bytes_ = 0;
  bool busy_ = false;
  bool stall_wakeup_pending_ = false;

  SimTime history_horizon_{};
  std::deque<std::pair<SimTime, std::int64_t>> history_;

  PathStats stats_;
};

}  // namespace mcsim

#endif  // MCSIM_RADIO_PATH_HPP
