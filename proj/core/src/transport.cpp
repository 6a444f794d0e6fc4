// SPDX-License-Identifier: Apache-2.0

#include "mcsim/transport.hpp"

#include <algorithm>
#include <cmath>

namespace mcsim {

UdpSource::UdpSource(Simulator& sim, std::uint64_t rate_bps, std::int32_t sdu_bytes,
                     SimTime stop_at, std::uint64_t max_sdus, SubmitFn submit)
    : sim_(sim),
      rate_bps_(rate_bps),
      sdu_bytes_(sdu_bytes),
      stop_at_(stop_at),
      max_sdus_(max_sdus),
      submit_(std::move(submit)) {}

SimTime UdpSource::tick_time(std::uint64_t k) const {
  const std::uint64_t bits = static_cast<std::uint64_t>(sdu_bytes_) * 8;
  return SimTime::us(static_cast<std::int64_t>(k * bits * 1000000 / rate_bps_));
}

double UdpSource::interval_us() const {
  return static_cast<double>(sdu_bytes_) * 8.0 * 1e6 / static_cast<double>(rate_bps_);
}

void UdpSource::start() {
  if (rate_bps_ == 0) return;
  schedule_next();
}

void UdpSource::schedule_next() {
  if (max_sdus_ != 0 && submitted_ >= max_sdus_) return;
  const SimTime at = tick_time(submitted_ + 1);
  if (at > stop_at_) return;
  sim_.schedule(at, EventKind::kTrafficTick, 0, [this] {
    ++submitted_;
    submit_(sdu_bytes_);
    schedule_next();
  });
}

std::string_view to_string(TcpPhase phase) {
  switch (phase) {
    case TcpPhase::kSlowStart: return "slow_start";
    case TcpPhase::kCongestionAvoidance: return "congestion_avoidance";
    case TcpPhase::kFastRecovery: return "fast_recovery";
  }
  return "unknown";
}

TcpSender::TcpSender(Simulator& sim, TcpParams params, SendFn send)
    : sim_(sim),
      params_(params),
      send_(std::move(send)),
      cwnd_(std::max(params.initial_cwnd, 1.0)),
      ssthresh_(std::max(params.initial_ssthresh, 2.0)),
      rto_(params.initial_rto) {
  if (cwnd_ >= ssthresh_) phase_ = TcpPhase::kCongestionAvoidance;
}

void TcpSender::start() { try_send(); }

std::uint64_t TcpSender::window() const {
  const auto c = static_cast<std::uint64_t>(std::floor(cwnd_));
  return std::min(c, params_.rwnd_segments);
}

void TcpSender::send_segment(std::uint64_t seg) {
  if (sends_.size() <= seg) sends_.resize(seg + 1);
  const bool retransmission = seg < high_sent_;
  if (retransmission) {
    sends_[seg].retransmitted = true;
    ++counters_.retransmissions;
  } else {
    sends_[seg].sent_at = sim_.now();
    high_sent_ = seg + 1;
  }
  ++counters_.segments_sent;
  if (!rto_timer_.valid()) restart_rto_timer();
  send_(seg, retransmission);
}

void TcpSender::try_send() {
  while (flight() < window()) {
    send_segment(snd_nxt_);
    ++snd_nxt_;
  }
}

void TcpSender::retransmit_head() { send_segment(snd_una_); }

void TcpSender::restart_rto_timer() {
  if (rto_timer_.valid()) sim_.cancel(rto_timer_);
  rto_timer_ = sim_.schedule_in(rto_, EventKind::kTimerExpiry, 1, [this] {
    rto_timer_ = EventHandle{};
    on_rto();
  });
}

void TcpSender::stop_rto_timer() {
  if (rto_timer_.valid()) sim_.cancel(rto_timer_);
}

void TcpSender::take_rtt_sample(std::uint64_t ack) {
  const std::uint64_t seg = ack - 1;
  if (seg >= sends_.size() || sends_[seg].retransmitted) return;  // Karn
  const SimTime r = sim_.now() - sends_[seg].sent_at;
  if (!have_rtt_) {
    srtt_ = r;
    rttvar_ = SimTime::us(r.micros / 2);
    have_rtt_ = true;
  } else {
    const std::int64_t err = std::abs(srtt_.micros - r.micros);
    rttvar_ = SimTime::us((3 * rttvar_.micros + err) / 4);
    srtt_ = SimTime::us((7 * srtt_.micros + r.micros) / 8);
  }
  const SimTime candidate = srtt_ + SimTime::us(std::max<std::int64_t>(1, 4 * rttvar_.micros));
  rto_ = std::clamp(candidate, params_.min_rto, params_.max_rto);
}

void TcpSender::on_ack(std::uint64_t ack) {
  if (ack > high_sent_) return;  // acknowledges data never sent
  if (ack > snd_una_) {
    const std::uint64_t newly = ack - snd_una_;
    take_rtt_sample(ack);
    snd_una_ = ack;
    if (snd_nxt_ < snd_una_) snd_nxt_ = snd_una_;
    bool restart_timer = true;
    if (phase_ == TcpPhase::kFastRecovery) {
      if (static_cast<std::int64_t>(ack) > recover_) {
        cwnd_ = ssthresh_;
        phase_ = TcpPhase::kCongestionAvoidance;
        dupacks_ = 0;
      } else {
        retransmit_head();
        cwnd_ = std::max(cwnd_ - static_cast<double>(newly) + 1.0, 1.0);
        restart_timer = !partial_ack_seen_;
        partial_ack_seen_ = true;
      }
    } else {
      dupacks_ = 0;
      if (phase_ == TcpPhase::kSlowStart) {
        cwnd_ += 1.0;
        if (cwnd_ >= ssthresh_) phase_ = TcpPhase::kCongestionAvoidance;
      } else {
        cwnd_ += 1.0 / cwnd_;
      }
    }
    if (flight() == 0) {
      stop_rto_timer();
    } else if (restart_timer) {
      restart_rto_timer();
    }
  } else if (ack == snd_una_ && flight() > 0) {
    ++counters_.dup_acks;
    if (phase_ == TcpPhase::kFastRecovery) {
      cwnd_ += 1.0;
    } else if (++dupacks_ == 3 && static_cast<std::int64_t>(ack) > recover_) {
      ssthresh_ = std::max(static_cast<double>(flight()) / 2.0, 2.0);
      recover_ = static_cast<std::int64_t>(high_sent_) - 1;
      ++counters_.fast_retransmits;
      retransmit_head();
      cwnd_ = ssthresh_ + 3.0;
      phase_ = TcpPhase::kFastRecovery;
      partial_ack_seen_ = false;
    }
  }
  try_send();
}

void TcpSender::on_rto() {
  stop_rto_timer();
  if (flight() == 0) return;
  ++counters_.rto_events;
  ssthresh_ = std::max(static_cast<double>(flight()) / 2.0, 2.0);
  cwnd_ = 1.0;
  phase_ = TcpPhase::kSlowStart;
  recover_ = static_cast<std::int64_t>(high_sent_) - 1;
  dupacks_ = 0;
  rto_ = std::min(SimTime::us(rto_.micros * 2), params_.max_rto);
  // Go back N: resend from the first unacknowledged segment.
  snd_nxt_ = snd_una_;
  send_segment(snd_nxt_);
  ++snd_nxt_;
}

TcpDelivery TcpReceiver::on_segment(std::uint64_t segment) {
  TcpDelivery d;
  d.first_new = rcv_nxt_;
  if (segment == rcv_nxt_) {
    ++rcv_nxt_;
    for (auto it = ooo_.begin(); it != ooo_.end() && *it == rcv_nxt_; it = ooo_.erase(it)) {
      ++rcv_nxt_;
    }
  } else {
    if (segment > rcv_nxt_) ooo_.insert(segment);
    d.duplicate_ack = true;
  }
  d.ack = rcv_nxt_;
  return d;
}

}  // namespace mcsim
