// SPDX-License-Identifier: Apache-2.0

#include "mcsim/pdcp_rx.hpp"

#include <stdexcept>
#include <string>

namespace mcsim {

PdcpReceiver::PdcpReceiver(Simulator& sim, RxConfig config, std::uint32_t id)
    : sim_(sim), config_(config), id_(id) {
  if (!valid_sn_len(config_.sn_len)) {
    throw std::invalid_argument("unsupported sn_len " + std::to_string(config_.sn_len));
  }
  if (config_.t_reordering < SimTime{}) throw std::invalid_argument("negative t-Reordering");
}

std::optional<std::uint64_t> PdcpReceiver::recover_count(std::uint32_t sn) const {
  std::uint64_t base = rx_deliv_;
  if (!config_.reordering && rx_next_ > 0) base = rx_next_ - 1;
  const int n = config_.sn_len;
  const auto window = static_cast<std::int64_t>(std::uint64_t{1} << (n - 1));
  const auto base_sn = static_cast<std::int64_t>(sn_of(base, n));
  const std::uint64_t base_hfn = hfn_of(base, n);
  const auto rcvd = static_cast<std::int64_t>(sn);
  if (rcvd < base_sn - window) return make_count(base_hfn + 1, sn, n);
  if (rcvd >= base_sn + window) {
    if (base_hfn == 0) return std::nullopt;
    return make_count(base_hfn - 1, sn, n);
  }
  return make_count(base_hfn, sn, n);
}

void PdcpReceiver::deliver(const PdcpPdu& pdu, std::uint64_t count, DeliveryBatch& batch) {
  if (delivered_.size() <= count) delivered_.resize(count + 1 + delivered_.size() / 2, false);
  delivered_[count] = true;
  const bool in_order = !highest_delivered_ || count > *highest_delivered_;
  if (in_order) {
    highest_delivered_ = count;
  } else {
    ++counters_.out_of_order;
  }
  ++counters_.delivered;
  batch.delivered.push_back(DeliveredSdu{pdu.sdu_id, count, pdu.size_bytes, pdu.created_at,
                                         sim_.now(), in_order});
}

void PdcpReceiver::deliver_consecutive_from_rx_deliv(DeliveryBatch& batch) {
  for (auto it = buffer_.find(rx_deliv_); it != buffer_.end() && it->first == rx_deliv_;
       it = buffer_.erase(it)) {
    buffer_bytes_ -= it->second.size_bytes;
    deliver(it->second, it->first, batch);
    ++rx_deliv_;
  }
}

ReceiveResult PdcpReceiver::receive_pdu(const PdcpPdu& pdu) {
  ReceiveResult r;
  ++counters_.received;
  r.count = recover_count(pdu.sn);
  if (!r.count) {
    r.outcome = RxOutcome::kStale;
    ++counters_.stale;
    return r;
  }
  const std::uint64_t count = *r.count;

  if (was_delivered(count) || buffer_.contains(count)) {
    r.outcome = RxOutcome::kDuplicate;
    ++counters_.duplicates;
    return r;
  }
  if (count < rx_deliv_) {
    r.outcome = RxOutcome::kStale;
    ++counters_.stale;
    return r;
  }

  if (count >= rx_next_) rx_next_ = count + 1;

  if (!config_.reordering) {
    deliver(pdu, count, r.batch);
    while (was_delivered(rx_deliv_)) ++rx_deliv_;
    return r;
  }

  buffer_.emplace(count, pdu);
  buffer_bytes_ += pdu.size_bytes;
  if (count == rx_deliv_) deliver_consecutive_from_rx_deliv(r.batch);

  if (timer_running() && rx_deliv_ >= rx_reord_) {
    sim_.cancel(timer_);
  }
  if (!timer_running() && rx_deliv_ < rx_next_) {
    rx_reord_ = rx_next_;
    start_timer();
  }
  return r;
}

DeliveryBatch PdcpReceiver::on_t_reordering_expiry() {
  if (timer_.valid()) sim_.cancel(timer_);
  ++counters_.expiries;
  DeliveryBatch batch;
  // Everything below RX_REORD goes up in COUNT order; holes are given up.
  for (std::uint64_t c = rx_deliv_; c < rx_reord_; ++c) {
    auto it = buffer_.find(c);
    if (it != buffer_.end()) {
      buffer_bytes_ -= it->second.size_bytes;
      deliver(it->second, c, batch);
      buffer_.erase(it);
    } else if (!was_delivered(c)) {
      batch.declared_lost.push_back(c);
      ++counters_.declared_lost;
    }
  }
  if (rx_reord_ > rx_deliv_) rx_deliv_ = rx_reord_;
  deliver_consecutive_from_rx_deliv(batch);
  if (rx_deliv_ < rx_next_) {
    rx_reord_ = rx_next_;
    start_timer();
  }
  return batch;
}

void PdcpReceiver::start_timer() {
  timer_ = sim_.schedule_in(config_.t_reordering, EventKind::kTimerExpiry, id_,
                            [this] { fire_timer(); });
}

void PdcpReceiver::fire_timer() {
  timer_ = EventHandle{};
  DeliveryBatch batch = on_t_reordering_expiry();
  if (expiry_sink_) expiry_sink_(batch);
}

}  // namespace mcsim
