// SPDX-License-Identifier: Apache-2.0

#include "mcsim/radio_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcsim {

void validate(const PathParams& params, std::int32_t max_pdu_bytes) {
  const std::string where = "path '" + params.id + "': ";
  if (params.backhaul_delay < SimTime{}) throw std::invalid_argument(where + "negative backhaul delay");
  if (params.prop_delay < SimTime{}) throw std::invalid_argument(where + "negative propagation delay");
  if (!(params.loss_prob >= 0.0 && params.loss_prob <= 1.0)) {
    throw std::invalid_argument(where + "loss_prob must be in [0, 1]");
  }
  if (params.queue_limit_bytes <= max_pdu_bytes) {
    throw std::invalid_argument(where + "queue limit must exceed the maximum PDU size");
  }
  if (!(params.peak_rate_bps >= 0.0)) throw std::invalid_argument(where + "negative peak rate");
  if (params.trace.cqi.empty()) throw std::invalid_argument(where + "empty channel trace");
}

RadioPath::RadioPath(Simulator& sim, std::uint32_t index, PathParams params,
                     const CqiRateTable& table, RandomStream loss_rng)
    : sim_(sim),
      index_(index),
      params_(std::move(params)),
      table_(table),
      loss_rng_(std::move(loss_rng)) {}

SimTime RadioPath::serialization_time(std::int32_t bytes, double rate_bps) {
  const double us = static_cast<double>(bytes) * 8.0 * 1e6 / rate_bps;
  const double nearest = std::round(us);
  if (std::abs(us - nearest) < 1e-6) return SimTime::us(static_cast<std::int64_t>(nearest));
  return SimTime::us(static_cast<std::int64_t>(std::ceil(us)));
}

bool RadioPath::enqueue(PdcpPdu pdu) {
  ++stats_.enqueued;
  if (occupancy_bytes_ + pdu.size_bytes > params_.queue_limit_bytes) {
    ++stats_.dropped_overflow;
    return false;
  }
  pdu.path_id = index_;
  set_occupancy(occupancy_bytes_ + pdu.size_bytes);
  if (params_.backhaul_delay > SimTime{}) {
    ++backhaul_pdus_;
    sim_.schedule_in(params_.backhaul_delay, EventKind::kBackhaulRelease, index_,
                     [this, pdu] { release_from_backhaul(pdu); });
  } else {
    fifo_.push_back(pdu);
    try_start();
  }
  return true;
}

void RadioPath::release_from_backhaul(PdcpPdu pdu) {
  --backhaul_pdus_;
  fifo_.push_back(pdu);
  try_start();
}

void RadioPath::try_start() {
  if (busy_ || fifo_.empty()) return;
  const SimTime now = sim_.now();
  const double rate = rate_bps(now);
  if (rate <= 0.0) {
    // Stall until the first second with nonzero capacity.
    if (stall_wakeup_pending_) return;
    const auto next = next_nonzero_second(params_.trace, table_, now.whole_seconds() + 1);
    if (!next || params_.peak_rate_bps <= 0.0) return;
    stall_wakeup_pending_ = true;
    sim_.schedule(SimTime::sec(*next), EventKind::kTraceAdvance, index_, [this] {
      stall_wakeup_pending_ = false;
      try_start();
    });
    return;
  }
  busy_ = true;
  const SimTime tx = serialization_time(fifo_.front().size_bytes, rate);
  sim_.schedule_in(tx, EventKind::kLinkDeparture, index_, [this] { finish_transmission(); });
}

void RadioPath::finish_transmission() {
  const PdcpPdu pdu = fifo_.front();
  fifo_.pop_front();
  busy_ = false;
  set_occupancy(occupancy_bytes_ - pdu.size_bytes);
  ++stats_.dequeued;
  stats_.bytes_sent += pdu.size_bytes;
  const auto second = static_cast<std::size_t>(sim_.now().whole_seconds());
  if (stats_.bits_sent_per_second.size() <= second) stats_.bits_sent_per_second.resize(second + 1, 0);
  stats_.bits_sent_per_second[second] += std::int64_t{pdu.size_bytes} * 8;

  if (loss_rng_.bernoulli(params_.loss_prob)) {
    ++stats_.dropped_loss;
    if (on_loss_) on_loss_(pdu);
  } else {
    ++propagating_;
    sim_.schedule_in(params_.prop_delay, EventKind::kPacketArrival, index_, [this, pdu] {
      --propagating_;
      if (on_arrival_) on_arrival_(pdu);
    });
  }
  try_start();
}

void RadioPath::set_occupancy(std::int64_t bytes) {
  occupancy_bytes_ = bytes;
  if (history_horizon_ <= SimTime{}) return;
  const SimTime now = sim_.now();
  if (!history_.empty() && history_.back().first == now) {
    history_.back().second = bytes;
  } else {
    history_.emplace_back(now, bytes);
  }
  // Keep the newest entry at or before now - horizon; drop anything older.
  const SimTime cutoff = now - history_horizon_;
  while (history_.size() > 1 && history_[1].first <= cutoff) history_.pop_front();
}

std::int64_t RadioPath::queue_bytes_at(SimTime t) const {
  if (history_horizon_ <= SimTime{} || t >= sim_.now()) return occupancy_bytes_;
  auto it = std::upper_bound(history_.begin(), history_.end(), t,
                             [](SimTime v, const auto& e) { return v < e.first; });
  if (it == history_.begin()) return 0;
  return std::prev(it)->second;
}

void RadioPath::sample_queue() { stats_.queue_bytes_samples.push_back(occupancy_bytes_); }

}  // namespace mcsim
