// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <numeric>

#include "mcsim/pdcp_rx.hpp"
#include "mcsim/runner.hpp"

using namespace mcsim;

namespace {

void BM_EventQueue(benchmark::State& state) {
  const auto n = state.range(0);
  for (auto _ : state) {
    Simulator sim;
    RandomStream rng(1);
    std::int64_t fired = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      sim.schedule(SimTime::us(static_cast<std::int64_t>(rng.below(1'000'000))),
                   EventKind::kPacketArrival, 0, [&fired] { ++fired; });
    }
    sim.run_until(SimTime::sec(1));
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1 << 10)->Arg(1 << 16);

void BM_ReceiverShuffled(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RandomStream rng(7);
  for (std::size_t k = n - 1; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);
  for (auto _ : state) {
    Simulator sim;
    PdcpReceiver rx(sim, {.sn_len = 18, .reordering = true, .t_reordering = SimTime::ms(100)});
    std::size_t delivered = 0;
    for (std::uint64_t c : order) {
      PdcpPdu p;
      p.count = c;
      p.sn = sn_of(c, 18);
      p.sdu_id = c;
      p.size_bytes = 1400;
      delivered += rx.receive_pdu(p).batch.delivered.size();
    }
    benchmark::DoNotOptimize(delivered);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ReceiverShuffled)->Arg(1000)->Arg(10000);

void BM_FullRun(benchmark::State& state) {
  ScenarioConfig c;
  c.mode = state.range(0) ? Mode::kDcReo : Mode::kSC;
  for (const char* id : {"A", "B"}) {
    PathConfig p;
    p.id = id;
    p.cqi_samples = {15, 12, 9, 14};
    p.trace.cqi = p.cqi_samples;
    p.peak_rate_mbps = 20;
    c.paths.push_back(p);
    if (c.mode == Mode::kSC) break;
  }
  c.reordering = c.mode != Mode::kSC;
  c.traffic.type = state.range(1) ? TrafficType::kTcp : TrafficType::kUdp;
  c.traffic.udp_rate_mbps = 40;
  c.duration_s = 10;
  c.sn_len = 18;
  for (auto _ : state) {
    const auto m = run_scenario(c);
    state.counters["events"] = static_cast<double>(m.events_processed);
  }
}
BENCHMARK(BM_FullRun)->Args({0, 0})->Args({1, 0})->Args({1, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
