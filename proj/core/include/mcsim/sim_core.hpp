// SPDX-License-Identifier: Apache-2.0
//
// Deterministic discrete-event engine: microsecond clock, ordered
// future-event list with cancellation, and seeded random streams.

#ifndef MCSIM_SIM_CORE_HPP
#define MCSIM_SIM_CORE_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string_view>

namespace mcsim {

/// Simulation time (and durations) in integer microseconds.
struct SimTime {
  std::int64_t micros = 0;

  static constexpr SimTime us(std::int64_t v) { return SimTime{v}; }
  static constexpr SimTime ms(std::int64_t v) { return SimTime{v * 1000}; }
  static constexpr SimTime sec(std::int64_t v) { return SimTime{v * 1000000}; }
  /// Rounds to the nearest microsecond.
  static SimTime from_seconds(double s);

  constexpr double seconds() const { return static_cast<double>(micros) * 1e-6; }
  constexpr double millis() const { return static_cast<double>(micros) * 1e-3; }
  /// floor(t in seconds); valid for non-negative times.
  constexpr std::int64_t whole_seconds() const { return micros / 1000000; }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimTime o) const { return SimTime{micros + o.micros}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{micros - o.micros}; }
  constexpr SimTime& operator+=(SimTime o) {
    micros += o.micros;
    return *this;
  }
};

enum class EventKind : std::uint8_t {
  kPacketArrival,
  kTimerExpiry,
  kTrafficTick,
  kTraceAdvance,
  kLinkDeparture,
  kBackhaulRelease,
  kAckArrival,
  kGeneric,
};

std::string_view to_string(EventKind kind);

/// Identifies a scheduled event; valid until it fires or is cancelled.
struct EventHandle {
  SimTime fire_at{};
  std::uint64_t seq = 0;
  bool valid() const { return seq != 0; }
};

struct RunSummary {
  std::uint64_t events_processed = 0;
  SimTime final_time{};
};

/// Observer invoked for every processed event, before its action.
using EventObserver =
    std::function<void(SimTime fire_at, std::uint64_t seq, EventKind kind, std::uint32_t target)>;

class Simulator {
 public:
  using Action = std::function<void()>;

  SimTime now() const { return now_; }

  /// Events are totally ordered by (fire_at, seq). Scheduling in the past
  /// throws std::logic_error.
  EventHandle schedule(SimTime fire_at, EventKind kind, std::uint32_t target, Action action);
  EventHandle schedule_in(SimTime delay, EventKind kind, std::uint32_t target, Action action) {
    return schedule(now_ + delay, kind, target, std::move(action));
  }

  /// True iff the event was still pending and is now removed.
  bool cancel(EventHandle& handle);

  /// Processes every event with fire_at <= t_end, then sets the clock to t_end.
  RunSummary run_until(SimTime t_end);

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t scheduled_count() const { return next_seq_ - 1; }
  std::uint64_t processed_count() const { return processed_; }
  std::uint64_t cancelled_count() const { return cancelled_; }

  void set_observer(EventObserver observer) { observer_ = std::move(observer); }

 private:
  struct Key {
    SimTime fire_at;
    std::uint64_t seq;
    auto operator<=>(const Key&) const = default;
  };
  struct Entry {
    EventKind kind;
    std::uint32_t target;
    Action action;
  };

  SimTime now_{};
  std::uint64_t next_seq_ = 1;
  std::uint64_t processed_ = 0;
  std::uint64_t cancelled_ = 0;
  std::map<Key, Entry> queue_;
  EventObserver observer_;
};

/// Seeded pseudo-random stream backed by std::mt19937_64, whose output
/// sequence is fixed by the standard. Conversions to doubles and bounded
/// integers are done here rather than through <random> distributions, which
/// are implementation-defined.
class RandomStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent stream for a named component; depends only on (seed, label).
  static RandomStream derive(std::uint64_t seed, std::string_view label);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mcsim

#endif  // MCSIM_SIM_CORE_HPP
