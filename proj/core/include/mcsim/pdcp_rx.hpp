// SPDX-License-Identifier: Apache-2.0
//
// PDCP receiver: COUNT recovery from the wire SN, duplicate and stale
// discard, reordering buffer and the t-Reordering timer.
//
// The window is the COUNT-based formulation: RX_DELIV is the first COUNT not
// yet delivered, RX_NEXT follows the highest COUNT received and RX_REORD is
// the RX_NEXT value that armed the timer. This is the NR statement of the
// LTE split-bearer reordering procedure; both deliver in COUNT order and
// flush everything below the arming point on expiry.

#ifndef MCSIM_PDCP_RX_HPP
#define MCSIM_PDCP_RX_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mcsim/pdu.hpp"
#include "mcsim/sim_core.hpp"

namespace mcsim {

struct RxConfig {
  int sn_len = 12;
  bool reordering = true;
  SimTime t_reordering = SimTime::ms(100);
};

struct DeliveredSdu {
  std::uint64_t sdu_id = 0;
  std::uint64_t count = 0;
  std::int32_t size_bytes = 0;
  SimTime created_at{};
  SimTime delivered_at{};
  bool in_order = true;  // COUNT above every earlier delivery
};

struct DeliveryBatch {
  std::vector<DeliveredSdu> delivered;
  /// COUNTs skipped at timer expiry; upper layers treat them as lost.
  std::vector<std::uint64_t> declared_lost;

  bool empty() const { return delivered.empty() && declared_lost.empty(); }
};

enum class RxOutcome {
  kAccepted,   // buffered and/or delivered
  kDuplicate,  // COUNT already buffered or delivered
  kStale,      // COUNT below RX_DELIV that was never delivered
};

struct ReceiveResult {
  RxOutcome outcome = RxOutcome::kAccepted;
  std::optional<std::uint64_t> count;  // empty if the SN maps below COUNT 0
  DeliveryBatch batch;
};

struct BufferOccupancy {
  std::int64_t bytes = 0;
  std::size_t pdus = 0;
};

struct RxCounters {
  std::uint64_t received = 0;
  std::uint64_t delivered = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t stale = 0;
  std::uint64_t declared_lost = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t expiries = 0;
};

class PdcpReceiver {
 public:
  using ExpirySink = std::function<void(const DeliveryBatch&)>;

  PdcpReceiver(Simulator& sim, RxConfig config, std::uint32_t id = 0);
  PdcpReceiver(const PdcpReceiver&) = delete;
  PdcpReceiver& operator=(const PdcpReceiver&) = delete;

  /// Receives batches released by timer expiries fired from the event loop.
  void on_expiry(ExpirySink sink) { expiry_sink_ = std::move(sink); }

  /// Only pdu.sn is used to place the PDU; the COUNT is recovered from it.
  ReceiveResult receive_pdu(const PdcpPdu& pdu);

  /// Expiry procedure; cancels the pending timer event if called directly.
  DeliveryBatch on_t_reordering_expiry();

  /// The COUNT nearest the reference point (RX_DELIV with reordering, the
  /// highest received COUNT without) that carries this SN, within
  /// 2^(sn_len-1) either side.
  std::optional<std::uint64_t> recover_count(std::uint32_t sn) const;

  BufferOccupancy reorder_buffer_occupancy() const { return {buffer_bytes_, buffer_.size()}; }
  bool is_buffered(std::uint64_t count) const { return buffer_.contains(count); }

  std::uint64_t rx_deliv() const { return rx_deliv_; }
  std::uint64_t rx_next() const { return rx_next_; }
  std::uint64_t rx_reord() const { return rx_reord_; }
  bool timer_running() const { return timer_.valid(); }
  const RxConfig& config() const { return config_; }
  const RxCounters& counters() const { return counters_; }

 private:
  bool was_delivered(std::uint64_t count) const {
    return count < delivered_.size() && delivered_[count];
  }
  void deliver(const PdcpPdu& pdu, std::uint64_t count, DeliveryBatch& batch);
  void deliver_consecutive_from_rx_deliv(DeliveryBatch& batch);
  void start_timer();
  void fire_timer();

  Simulator& sim_;
  RxConfig config_;
  std::uint32_t id_;
  ExpirySink expiry_sink_;

  std::uint64_t rx_deliv_ = 0;
  std::uint64_t rx_next_ = 0;
  std::uint64_t rx_reord_ = 0;
  EventHandle timer_;

  std::map<std::uint64_t, PdcpPdu> buffer_;
  std::int64_t buffer_bytes_ = 0;
  std::vector<bool> delivered_;
  std::optional<std::uint64_t> highest_delivered_;
  RxCounters counters_;
};

}  // namespace mcsim

#endif  // MCSIM_PDCP_RX_HPP
