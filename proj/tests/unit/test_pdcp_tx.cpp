// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <memory>
#include <vector>

#include "doctest.h"
#include "mcsim/pdcp_tx.hpp"

using namespace mcsim;

namespace {

struct Fixture {
  Simulator sim;
  CqiRateTable table = CqiRateTable::lte_default();
  std::vector<std::unique_ptr<RadioPath>> paths;
  std::vector<std::vector<PdcpPdu>> enqueued;  // per path, observed at arrival

  explicit Fixture(std::size_t n, double bps = 10e6) {
    enqueued.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      PathParams p;
      p.id = std::string(1, static_cast<char>('A' + i));
      p.trace.cqi = {15};
      p.peak_rate_bps = bps;
      p.queue_limit_bytes = std::int64_t{1} << 40;
      paths.push_back(std::make_unique<RadioPath>(sim, static_cast<std::uint32_t>(i), p, table,
                                                  RandomStream(i)));
      paths.back()->on_arrival([this, i](const PdcpPdu& pdu) { enqueued[i].push_back(pdu); });
    }
  }

  std::vector<RadioPath*> raw() {
    std::vector<RadioPath*> v;
    for (auto& p : paths) v.push_back(p.get());
    return v;
  }
};

std::vector<std::uint32_t> targets(FlowController& fc, int n, std::size_t k) {
  std::vector<PathView> views(k);
  std::vector<std::uint32_t> out;
  for (int i = 0; i < n; ++i) {
    PdcpPdu p;
    p.count = static_cast<std::uint64_t>(i);
    const auto d = fc.decide(p, views);
    REQUIRE(d.target_paths.size() == 1);
    out.push_back(d.target_paths[0]);
  }
  return out;
}

}  // namespace

TEST_SUITE("pdcp_tx") {

TEST_CASE("COUNT, SN and HFN arithmetic") {
  CHECK(sn_of(4096, 12) == 0);
  CHECK(hfn_of(4096, 12) == 1);
  CHECK(make_count(1, 0, 12) == 4096);
  CHECK(sn_of(4095, 12) == 4095);
  CHECK(sn_of(300, 7) == 44);
  CHECK(hfn_of(300, 7) == 2);
  CHECK(valid_sn_len(7));
  CHECK(valid_sn_len(18));
  CHECK_FALSE(valid_sn_len(8));
}

TEST_CASE("first SDU gets COUNT 0; submission 4096 wraps the 12-bit SN") {
  Fixture f(1);
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kRoundRobin, f.raw());
  const auto first = tx.submit_sdu(0, 100);
  CHECK(first.pdu.count == 0);
  CHECK(first.pdu.sn == 0);
  for (std::uint64_t i = 1; i < 4096; ++i) tx.submit_sdu(i, 100);
  const auto r = tx.submit_sdu(4096, 100);
  CHECK(r.pdu.count == 4096);
  CHECK(r.pdu.sn == 0);
  CHECK(hfn_of(r.pdu.count, 12) == 1);
}

TEST_CASE("duplication stamps the same COUNT on every path") {
  Fixture f(2);
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kDuplicate, f.raw());
  for (std::uint64_t i = 0; i < 10; ++i) tx.submit_sdu(i, 500);
  f.sim.run_until(SimTime::sec(1));
  REQUIRE(f.enqueued[0].size() == 10);
  REQUIRE(f.enqueued[1].size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(f.enqueued[0][i].count == f.enqueued[1][i].count);
    CHECK(f.enqueued[0][i].sdu_id == f.enqueued[1][i].sdu_id);
    CHECK(f.enqueued[0][i].path_id == 0);
    CHECK(f.enqueued[1][i].path_id == 1);
  }
}

TEST_CASE("round robin cycles in path order") {
  SUBCASE("two paths") {
    FlowController fc(FlowPolicy::kRoundRobin);
    CHECK(targets(fc, 4, 2) == std::vector<std::uint32_t>{0, 1, 0, 1});
  }
  SUBCASE("three paths") {
    FlowController fc(FlowPolicy::kRoundRobin);
    CHECK(targets(fc, 5, 3) == std::vector<std::uint32_t>{0, 1, 2, 0, 1});
  }
  SUBCASE("one path") {
    FlowController fc(FlowPolicy::kRoundRobin);
    CHECK(targets(fc, 3, 1) == std::vector<std::uint32_t>{0, 0, 0});
  }
}

TEST_CASE("round robin ignores queue state") {
  FlowController fc(FlowPolicy::kRoundRobin);
  std::vector<PathView> views{{1'000'000, 1.0}, {0, 1e9}};
  PdcpPdu p;
  CHECK(fc.decide(p, views).target_paths == std::vector<std::uint32_t>{0});
  CHECK(fc.decide(p, views).target_paths == std::vector<std::uint32_t>{1});
}

TEST_CASE("round robin balance after m submissions") {
  for (std::size_t k = 1; k <= 5; ++k) {
    for (int m = 0; m <= 53; ++m) {
      FlowController fc(FlowPolicy::kRoundRobin);
      std::vector<int> per(k, 0);
      for (auto t : targets(fc, m, k)) ++per[t];
      for (int c : per) {
        const int lo = m / static_cast<int>(k);
        const int hi = (m + static_cast<int>(k) - 1) / static_cast<int>(k);
        CHECK((c == lo || c == hi));
      }
    }
  }
}

TEST_CASE("queue aware picks the smallest drain time") {
  FlowController fc(FlowPolicy::kQueueAware);
  PdcpPdu p;
  p.size_bytes = 1500;
  SUBCASE("equal rates, A longer") {
    std::vector<PathView> v{{3000, 10e6}, {1500, 10e6}};
    CHECK(fc.decide(p, v).target_paths == std::vector<std::uint32_t>{1});
  }
  SUBCASE("zero rate is floored, not infinite") {
    std::vector<PathView> v{{0, 0.0}, {0, 1e6}};
    CHECK(fc.decide(p, v).target_paths == std::vector<std::uint32_t>{1});
  }
  SUBCASE("15 vs 12 Mb/s with equal queues") {
    std::vector<PathView> v{{15000, 15e6}, {15000, 12e6}};
    const double a = 16500.0 * 8 / 15e6;
    const double b = 16500.0 * 8 / 12e6;
    CHECK(a == doctest::Approx(0.0088));
    CHECK(b == doctest::Approx(0.011));
    CHECK(fc.decide(p, v).target_paths == std::vector<std::uint32_t>{0});
  }
  SUBCASE("ties go to the lowest index") {
    std::vector<PathView> v{{500, 10e6}, {500, 10e6}, {500, 10e6}};
    CHECK(fc.decide(p, v).target_paths == std::vector<std::uint32_t>{0});
    std::vector<PathView> w{{900, 10e6}, {500, 10e6}, {500, 10e6}};
    CHECK(fc.decide(p, w).target_paths == std::vector<std::uint32_t>{1});
  }
}

TEST_CASE("duplicate targets every path") {
  FlowController fc(FlowPolicy::kDuplicate);
  PdcpPdu p;
  for (std::size_t k = 1; k <= 3; ++k) {
    std::vector<PathView> v(k);
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < k; ++i) all.push_back(i);
    CHECK(fc.decide(p, v).target_paths == all);
    CHECK(fc.decide(p, v).target_paths == all);
  }
}

TEST_CASE("policy never changes COUNT assignment") {
  std::map<FlowPolicy, std::vector<std::uint64_t>> counts;
  for (auto policy : {FlowPolicy::kRoundRobin, FlowPolicy::kQueueAware, FlowPolicy::kDuplicate}) {
    Fixture f(3);
    PdcpTransmitter tx(f.sim, 7, policy, f.raw());
    RandomStream rng(1);
    for (std::uint64_t i = 0; i < 500; ++i) {
      const auto r = tx.submit_sdu(i, 1 + static_cast<std::int32_t>(rng.below(1500)));
      counts[policy].push_back(r.pdu.count);
      CHECK(r.pdu.sn == sn_of(r.pdu.count, 7));
      CHECK(r.accepted.size() == r.decision.target_paths.size());
    }
    CHECK(tx.next_count() == 500);
  }
  const auto& rr = counts[FlowPolicy::kRoundRobin];
  for (std::size_t i = 0; i < rr.size(); ++i) CHECK(rr[i] == i);
  CHECK(counts[FlowPolicy::kQueueAware] == rr);
  CHECK(counts[FlowPolicy::kDuplicate] == rr);
}

TEST_CASE("every sdu_id appears once per path in duplication mode") {
  Fixture f(3);
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kDuplicate, f.raw());
  for (std::uint64_t i = 0; i < 200; ++i) tx.submit_sdu(1000 + i, 200);
  for (const auto& p : f.paths) CHECK(p->stats().enqueued == 200);
}

TEST_CASE("queue aware fills the faster path more") {
  Fixture f(2);
  f.paths.clear();
  f.enqueued.assign(2, {});
  for (std::uint32_t i = 0; i < 2; ++i) {
    PathParams p;
    p.id = i == 0 ? "A" : "B";
    p.trace.cqi = {15};
    p.peak_rate_bps = i == 0 ? 15e6 : 5e6;
    p.queue_limit_bytes = std::int64_t{1} << 40;
    f.paths.push_back(std::make_unique<RadioPath>(f.sim, i, p, f.table, RandomStream(i)));
  }
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kQueueAware, f.raw());
  for (std::uint64_t i = 0; i < 400; ++i) tx.submit_sdu(i, 1000);
  const double a = static_cast<double>(f.paths[0]->stats().enqueued);
  const double b = static_cast<double>(f.paths[1]->stats().enqueued);
  CHECK(a / b == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("feedback delay shows stale queue depths") {
  Fixture f(2, 1e6);
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kQueueAware, f.raw(), SimTime::ms(10));
  f.sim.run_until(SimTime::ms(5));
  tx.submit_sdu(0, 1000);  // both empty, ties to A
  f.sim.run_until(SimTime::ms(6));
  // A's backlog is not visible yet, so the next PDU also goes to A.
  CHECK(tx.submit_sdu(1, 1000).decision.target_paths == std::vector<std::uint32_t>{0});
  f.sim.run_until(SimTime::ms(16));
  CHECK(tx.snapshot()[0].queue_bytes == 2000);
  CHECK(f.paths[0]->queue_bytes() == 1000);

  Fixture g(2, 1e6);
  PdcpTransmitter fresh(g.sim, 12, FlowPolicy::kQueueAware, g.raw());
  g.sim.run_until(SimTime::ms(5));
  fresh.submit_sdu(0, 1000);
  g.sim.run_until(SimTime::ms(6));
  CHECK(fresh.submit_sdu(1, 1000).decision.target_paths == std::vector<std::uint32_t>{1});
}

TEST_CASE("invalid sizes and construction") {
  Fixture f(1);
  PdcpTransmitter tx(f.sim, 12, FlowPolicy::kRoundRobin, f.raw());
  CHECK_THROWS_AS(tx.submit_sdu(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(tx.submit_sdu(0, PdcpTransmitter::kMaxSduBytes + 1), std::invalid_argument);
  CHECK_NOTHROW(tx.submit_sdu(0, PdcpTransmitter::kMaxSduBytes));
  CHECK(tx.next_count() == 1);
  CHECK_THROWS_AS(PdcpTransmitter(f.sim, 13, FlowPolicy::kRoundRobin, f.raw()),
                  std::invalid_argument);
  CHECK_THROWS_AS(PdcpTransmitter(f.sim, 12, FlowPolicy::kRoundRobin, {}), std::invalid_argument);
}

TEST_CASE("policy names") {
  CHECK(parse_flow_policy("round_robin") == FlowPolicy::kRoundRobin);
  CHECK(parse_flow_policy("queue_aware") == FlowPolicy::kQueueAware);
  CHECK(parse_flow_policy("duplicate") == FlowPolicy::kDuplicate);
  CHECK_FALSE(parse_flow_policy("rr").has_value());
  CHECK(to_string(FlowPolicy::kQueueAware) == "queue_aware");
}

}  // TEST_SUITE
