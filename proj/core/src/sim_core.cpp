// SPDX-License-Identifier: Apache-2.0

#include "mcsim/sim_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mcsim {

SimTime SimTime::from_seconds(double s) {
  return SimTime{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPacketArrival: return "packet-arrival";
    case EventKind::kTimerExpiry: return "timer-expiry";
    case EventKind::kTrafficTick: return "traffic-tick";
    case EventKind::kTraceAdvance: return "trace-advance";
    case EventKind::kLinkDeparture: return "link-departure";
    case EventKind::kBackhaulRelease: return "backhaul-release";
    case EventKind::kAckArrival: return "ack-arrival";
    case EventKind::kGeneric: return "generic";
  }
  return "unknown";
}

EventHandle Simulator::schedule(SimTime fire_at, EventKind kind, std::uint32_t target,
                                Action action) {
  if (fire_at < now_) {
    throw std::logic_error("schedule: fire_at " + std::to_string(fire_at.micros) +
                           "us is before now " + std::to_string(now_.micros) + "us");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.emplace(Key{fire_at, seq}, Entry{kind, target, std::move(action)});
  return EventHandle{fire_at, seq};
}

bool Simulator::cancel(EventHandle& handle) {
  if (!handle.valid()) return false;
  const bool removed = queue_.erase(Key{handle.fire_at, handle.seq}) > 0;
  if (removed) ++cancelled_;
  handle = EventHandle{};
  return removed;
}

RunSummary Simulator::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw std::logic_error("run_until: t_end is before now");
  }
  std::uint64_t processed = 0;
  while (!queue_.empty()) {
    auto it = queue_.begin();
    if (it->first.fire_at > t_end) break;
    auto node = queue_.extract(it);
    now_ = node.key().fire_at;
    Entry& entry = node.mapped();
    if (observer_) observer_(now_, node.key().seq, entry.kind, entry.target);
    ++processed;
    ++processed_;
    entry.action();
  }
  now_ = t_end;
  return RunSummary{processed, now_};
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t seed, std::string_view label) {
  return RandomStream(splitmix64(seed ^ fnv1a64(label)));
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RandomStream::below: bound must be positive");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace mcsim
