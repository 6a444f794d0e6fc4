// SPDX-License-Identifier: Apache-2.0

#include "mcsim/pdcp_tx.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mcsim {

std::string_view to_string(FlowPolicy policy) {
  switch (policy) {
    case FlowPolicy::kRoundRobin: return "round_robin";
    case FlowPolicy::kQueueAware: return "queue_aware";
    case FlowPolicy::kDuplicate: return "duplicate";
  }
  return "unknown";
}

std::optional<FlowPolicy> parse_flow_policy(std::string_view name) {
  if (name == "round_robin") return FlowPolicy::kRoundRobin;
  if (name == "queue_aware") return FlowPolicy::kQueueAware;
  if (name == "duplicate") return FlowPolicy::kDuplicate;
  return std::nullopt;
}

FlowDecision FlowController::decide(const PdcpPdu& pdu, std::span<const PathView> snapshot) {
  if (snapshot.empty()) throw std::logic_error("decide: no paths configured");
  FlowDecision d;
  switch (policy_) {
    case FlowPolicy::kRoundRobin: {
      d.target_paths.push_back(static_cast<std::uint32_t>(rr_next_ % snapshot.size()));
      rr_next_ = (rr_next_ + 1) % snapshot.size();
      break;
    }
    case FlowPolicy::kQueueAware: {
      std::size_t best = 0;
      double best_drain = 0.0;
      for (std::size_t i = 0; i < snapshot.size(); ++i) {
        const double bits = static_cast<double>(snapshot[i].queue_bytes + pdu.size_bytes) * 8.0;
        const double drain = bits / std::max(snapshot[i].rate_bps, kRateFloorBps);
        if (i == 0 || drain < best_drain) {
          best = i;
          best_drain = drain;
        }
      }
      d.target_paths.push_back(static_cast<std::uint32_t>(best));
      break;
    }
    case FlowPolicy::kDuplicate: {
      for (std::size_t i = 0; i < snapshot.size(); ++i) {
        d.target_paths.push_back(static_cast<std::uint32_t>(i));
      }
      break;
    }
  }
  return d;
}

PdcpTransmitter::PdcpTransmitter(Simulator& sim, int sn_len, FlowPolicy policy,
                                 std::vector<RadioPath*> paths, SimTime feedback_delay)
    : sim_(sim),
      sn_len_(sn_len),
      controller_(policy),
      paths_(std::move(paths)),
      feedback_delay_(feedback_delay) {
  if (!valid_sn_len(sn_len)) throw std::invalid_argument("unsupported sn_len " + std::to_string(sn_len));
  if (paths_.empty()) throw std::invalid_argument("PdcpTransmitter needs at least one path");
  for (RadioPath* p : paths_) p->set_history_horizon(feedback_delay_);
}

std::vector<PathView> PdcpTransmitter::snapshot() const {
  std::vector<PathView> views;
  views.reserve(paths_.size());
  const SimTime now = sim_.now();
  const SimTime seen_at = std::max(SimTime{}, now - feedback_delay_);
  for (const RadioPath* p : paths_) {
    views.push_back(PathView{p->queue_bytes_at(seen_at), p->rate_bps(seen_at)});
  }
  return views;
}

SubmitResult PdcpTransmitter::submit_sdu(std::uint64_t sdu_id, std::int32_t size_bytes) {
  if (size_bytes <= 0 || size_bytes > kMaxSduBytes) {
    throw std::invalid_argument("submit_sdu: size " + std::to_string(size_bytes) +
                                " outside (0, " + std::to_string(kMaxSduBytes) + "]");
  }
  SubmitResult r;
  r.pdu.count = next_count_++;
  r.pdu.sn = sn_of(r.pdu.count, sn_len_);
  r.pdu.sdu_id = sdu_id;
  r.pdu.size_bytes = size_bytes;
  r.pdu.created_at = sim_.now();

  if (controller_.policy() == FlowPolicy::kRoundRobin ||
      controller_.policy() == FlowPolicy::kDuplicate) {
    // These policies ignore path state; skip building the snapshot.
    std::vector<PathView> blank(paths_.size());
    r.decision = controller_.decide(r.pdu, blank);
  } else {
    const auto views = snapshot();
    r.decision = controller_.decide(r.pdu, views);
  }
  r.accepted.reserve(r.decision.target_paths.size());
  for (std::uint32_t idx : r.decision.target_paths) {
    r.accepted.push_back(paths_[idx]->enqueue(r.pdu));
  }
  return r;
}

}  // namespace mcsim
