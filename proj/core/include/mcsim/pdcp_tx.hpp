// SPDX-License-Identifier: Apache-2.0
//
// PDCP transmitter at the anchor node: COUNT assignment and routing of each
// PDU to one path (split bearer) or to every path (duplication).

#ifndef MCSIM_PDCP_TX_HPP
#define MCSIM_PDCP_TX_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcsim/pdu.hpp"
#include "mcsim/radio_path.hpp"

namespace mcsim {

enum class FlowPolicy { kRoundRobin, kQueueAware, kDuplicate };

std::string_view to_string(FlowPolicy policy);
std::optional<FlowPolicy> parse_flow_policy(std::string_view name);

/// What the transmitter knows about one path when it routes a PDU.
struct PathView {
  std::int64_t queue_bytes = 0;
  double rate_bps = 0.0;
};

struct FlowDecision {
  std::vector<std::uint32_t> target_paths;
};

class FlowController {
 public:
  /// Rate floor used by queue_aware so a zero-rate path has a finite drain time.
  static constexpr double kRateFloorBps = 1.0;

  explicit FlowController(FlowPolicy policy) : policy_(policy) {}

  /// round_robin cycles through path indices one PDU at a time; queue_aware
  /// picks the smallest (queue_bytes + size) * 8 / max(rate, floor), lowest
  /// index on ties; duplicate targets every path.
  FlowDecision decide(const PdcpPdu& pdu, std::span<const PathView> snapshot);

  FlowPolicy policy() const { return policy_; }

 private:
  FlowPolicy policy_;
  std::size_t rr_next_ = 0;
};

struct SubmitResult {
  PdcpPdu pdu;  // path_id unset; each copy is stamped by its path
  FlowDecision decision;
  std::vector<bool> accepted;  // parallel to decision.target_paths
};

class PdcpTransmitter {
 public:
  static constexpr std::int32_t kMaxSduBytes = 8188;

  /// `paths` must outlive the transmitter. feedback_delay > 0 makes the flow
  /// controller see queue depths as they were that long ago.
  PdcpTransmitter(Simulator& sim, int sn_len, FlowPolicy policy, std::vector<RadioPath*> paths,
                  SimTime feedback_delay = {});

  SubmitResult submit_sdu(std::uint64_t sdu_id, std::int32_t size_bytes);

  std::uint64_t next_count() const { return next_count_; }
  int sn_len() const { return sn_len_; }
  std::vector<PathView> snapshot() const;

 private:
  Simulator& sim_;
  int sn_len_;
  FlowController controller_;
  std::vector<RadioPath*> paths_;
  SimTime feedback_delay_;
  std::uint64_t next_count_ = 0;
};

}  // namespace mcsim

#endif  // MCSIM_PDCP_TX_HPP
