// SPDX-License-Identifier: Apache-2.0

#ifndef MCSIM_PDU_HPP
#define MCSIM_PDU_HPP

#include <cstdint>

#include "mcsim/sim_core.hpp"

namespace mcsim {

/// COUNT = HFN * 2^sn_len + SN.
constexpr std::uint32_t sn_of(std::uint64_t count, int sn_len) {
  return static_cast<std::uint32_t>(count & ((std::uint64_t{1} << sn_len) - 1));
}
constexpr std::uint64_t hfn_of(std::uint64_t count, int sn_len) { return count >> sn_len; }
constexpr std::uint64_t make_count(std::uint64_t hfn, std::uint32_t sn, int sn_len) {
  return (hfn << sn_len) | sn;
}

constexpr bool valid_sn_len(int sn_len) {
  return sn_len == 7 || sn_len == 12 || sn_len == 15 || sn_len == 18;
}

struct PdcpPdu {
  std::uint64_t count = 0;
  std::uint32_t sn = 0;  // only this goes on the wire
  std::uint64_t sdu_id = 0;
  std::int32_t size_bytes = 0;
  SimTime created_at{};
  std::uint32_t path_id = 0;
};

}  // namespace mcsim

#endif  // MCSIM_PDU_HPP
