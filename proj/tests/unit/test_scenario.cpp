// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <set>

#include "doctest.h"
#include "mcsim/scenario.hpp"
#include "test_support.hpp"

using namespace mcsim;

namespace {

const char* kMinimalSc = R"({
  "mode": "SC",
  "paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": 15}]
})";

std::string error_of(const std::string& json, const std::filesystem::path& dir = ".") {
  try {
    parse_config(json, dir);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

std::string matrix_error_of(const std::string& json) {
  try {
    parse_matrix(json, test_support::data_dir());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("minimal SC config with TCP is valid and fully defaulted") {
  const auto c = parse_config(kMinimalSc, ".");
  CHECK(c.mode == Mode::kSC);
  CHECK(c.paths.size() == 1);
  CHECK(c.paths[0].backhaul_delay_ms == 0.0);
  CHECK(c.paths[0].queue_limit_pdus == 500);
  CHECK(c.traffic.type == TrafficType::kTcp);
  CHECK(c.traffic.sdu_bytes == 1400);
  CHECK(c.duration_s == 30.0);
  CHECK(c.sn_len == 12);
  CHECK(c.policy == FlowPolicy::kRoundRobin);
  CHECK_FALSE(c.reordering);
  CHECK(c.tcp.initial_cwnd == 10.0);
  CHECK(c.tcp.initial_ssthresh == 64.0);
  CHECK(c.tcp.min_rto_ms == 200.0);
  CHECK(c.tcp.uplink_delay_ms == 5.0);
}

TEST_CASE("DC_Reo with one path is rejected") {
  const auto e = error_of(R"({"mode": "DC_Reo",
    "paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": 15}]})");
  CHECK(starts_with(e, "mode: DC_Reo requires at least 2 paths"));
}

TEST_CASE("mode invariants") {
  const std::string two = R"("paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": 15},
                                       {"id": "B", "cqi": [12], "peak_rate_mbps": 12}])";
  CHECK(starts_with(error_of(R"({"mode": "SC", )" + two + "}"), "mode: SC requires exactly 1 path"));
  CHECK(starts_with(error_of(R"({"mode": "DC_NoR", "reordering": "on", )" + two + "}"),
                    "reordering: DC_NoR requires reordering off"));
  CHECK(starts_with(error_of(R"({"mode": "DC_Reo", "reordering": "off", )" + two + "}"),
                    "reordering: DC_Reo requires reordering on"));
  CHECK(starts_with(error_of(R"({"mode": "DC_Dup", "policy": "round_robin", )" + two + "}"),
                    "policy: DC_Dup requires policy `duplicate`"));
  CHECK(starts_with(error_of(R"({"mode": "DC_Reo", "policy": "duplicate", )" + two + "}"),
                    "policy: policy `duplicate` is only valid with mode DC_Dup"));
  const auto dup = parse_config(R"({"mode": "DC_Dup", )" + two + "}", ".");
  CHECK(dup.policy == FlowPolicy::kDuplicate);
  CHECK(dup.reordering);
  const auto nor = parse_config(R"({"mode": "DC_NoR", )" + two + "}", ".");
  CHECK_FALSE(nor.reordering);
  CHECK(nor.paths[1].backhaul_delay_ms == 10.0);
}

TEST_CASE("anchor backhaul is forced to zero") {
  const auto c = parse_config(R"({"mode": "DC_Reo", "paths": [
    {"id": "A", "cqi": [15], "peak_rate_mbps": 15, "backhaul_delay_ms": 7},
    {"id": "B", "cqi": [12], "peak_rate_mbps": 12, "backhaul_delay_ms": 3}]})", ".");
  CHECK(c.paths[0].backhaul_delay_ms == 0.0);
  CHECK(c.paths[1].backhaul_delay_ms == 3.0);
}

TEST_CASE("errors carry the key path") {
  CHECK(error_of(R"({"mode": "SC", "paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": 15,
                     "colour": 1}]})") == "paths[0].colour: unknown key");
  CHECK(error_of(R"({"mode": "SC", "bogus": 1, "paths": []})") == "bogus: unknown key");
  CHECK(error_of(R"({"mode": "XX", "paths": []})") == "mode: unknown mode `XX`");
  CHECK(error_of(R"({"paths": []})") == "mode: missing");
  CHECK(error_of(R"({"mode": "SC", "paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": "fast"}]})") ==
        "paths[0].peak_rate_mbps: wrong type");
  CHECK(error_of(R"({"mode": "SC", "paths": [{"id": "A", "cqi": [15]}]})") ==
        "paths[0].peak_rate_mbps: missing");
  CHECK(starts_with(error_of(R"({"mode": "SC", "paths": [{"id": "A", "peak_rate_mbps": 1}]})"),
                    "paths[0]: exactly one of"));
  CHECK(starts_with(error_of(R"({"mode": "SC", "paths": [{"id": "A", "cqi": [16], "peak_rate_mbps": 1}]})"),
                    "paths[0].cqi: inline: line 1: cqi 16 out of range"));
  CHECK(starts_with(error_of(R"({"mode": "SC", "traffic": {"type": "sctp"},
                     "paths": [{"id": "A", "cqi": [1], "peak_rate_mbps": 1}]})"),
                    "traffic.type:"));
  CHECK(starts_with(error_of(R"({"mode": "SC", "sn_len": 9,
                     "paths": [{"id": "A", "cqi": [1], "peak_rate_mbps": 1}]})"),
                    "sn_len:"));
  CHECK(starts_with(error_of("{not json"), "<root>: invalid JSON"));
}

TEST_CASE("missing trace file names the key and the file") {
  const auto e = error_of(R"({"mode": "SC", "paths": [{"id": "A", "trace": "nope.csv",
                              "peak_rate_mbps": 1}]})",
                          "/tmp/mcsim-nowhere");
  CHECK(starts_with(e, "paths[0].trace: "));
  CHECK(e.find("nope.csv") != std::string::npos);
}

TEST_CASE("trace paths resolve against the config directory") {
  const auto m = load_matrix(test_support::data_dir() / "paper_s5.json");
  REQUIRE(m.base.paths.size() == 2);
  CHECK(m.base.paths[0].trace_file == "traces/pedestrian_a.csv");
  CHECK(m.base.paths[0].trace.size() == 30);
}

TEST_CASE("shipped matrix expands to the 16 showcase runs") {
  const auto m = load_matrix(test_support::data_dir() / "paper_s5.json");
  const auto runs = expand(m);
  std::vector<std::string> keys;
  for (const auto& r : runs) keys.push_back(r.key);
  CHECK(keys == std::vector<std::string>{
                    "SC_A_tcp", "SC_A_udp", "SC_B_tcp", "SC_B_udp", "DC_NoR_tcp", "DC_NoR_udp",
                    "DC_Reo_t40_tcp", "DC_Reo_t40_udp", "DC_Reo_t60_tcp", "DC_Reo_t60_udp",
                    "DC_Reo_t80_tcp", "DC_Reo_t80_udp", "DC_Reo_t100_tcp", "DC_Reo_t100_udp",
                    "DC_Reo_t150_tcp", "DC_Reo_t150_udp"});
  CHECK(runs.size() == (2 + 1 + 5) * 2);
  for (const auto& r : runs) {
    CAPTURE(r.key);
    if (r.variant == "SC_A" || r.variant == "SC_B") {
      CHECK(r.config.mode == Mode::kSC);
      REQUIRE(r.config.paths.size() == 1);
      CHECK(r.config.paths[0].backhaul_delay_ms == 0.0);
      CHECK(r.config.paths[0].id == r.variant.substr(3));
    } else {
      CHECK(r.config.paths.size() == 2);
      CHECK(r.config.paths[1].backhaul_delay_ms == 10.0);
      CHECK(r.config.policy == FlowPolicy::kRoundRobin);
    }
    CHECK(r.config.reordering == (r.variant == "DC_Reo"));
  }
  CHECK(m.baseline == "SC_A");
}

TEST_CASE("matrix keys are unique and include the seed axis when swept") {
  const auto m = parse_matrix(R"({
    "base": {"mode": "DC_Reo", "paths": [{"id": "A", "cqi": [15], "peak_rate_mbps": 15},
                                         {"id": "B", "cqi": [12], "peak_rate_mbps": 12}]},
    "variants": [{"key": "R", "mode": "DC_Reo"}, {"key": "N", "mode": "DC_NoR"}],
    "sweep": {"t_reordering_ms": [40, 62.5], "seed": [1, 2]}
  })", ".");
  const auto runs = expand(m);
  std::set<std::string> keys;
  for (const auto& r : runs) keys.insert(r.key);
  CHECK(runs.size() == 6);
  CHECK(keys.size() == 6);
  CHECK(keys.contains("R_t62.5_s2"));
  CHECK(keys.contains("N_s1"));
}

TEST_CASE("matrix errors") {
  CHECK(starts_with(matrix_error_of(R"({"base": {"mode": "SC", "paths": [
      {"id": "A", "cqi": [1], "peak_rate_mbps": 1}]},
      "variants": [{"key": "X", "mode": "SC"}, {"key": "X", "mode": "SC"}]})"),
                    "variants: duplicate run key `X`"));
  CHECK(starts_with(matrix_error_of(R"({"base": {"mode": "SC", "paths": [
      {"id": "A", "cqi": [1], "peak_rate_mbps": 1}]},
      "variants": [{"key": "X", "mode": "SC", "paths": ["Z"]}]})"),
                    "variants.X: unknown path id `Z`"));
  CHECK(starts_with(matrix_error_of(R"({"base": {"mode": "SC", "paths": [
      {"id": "A", "cqi": [1], "peak_rate_mbps": 1}]}, "baseline": "Q",
      "variants": [{"key": "X", "mode": "SC"}]})"),
                    "baseline: no variant named `Q`"));
  CHECK(starts_with(matrix_error_of(R"({"base": {"mode": "SC", "paths": [
      {"id": "A", "cqi": [1], "peak_rate_mbps": 1}]}, "sweep": {"t": [1]}})"),
                    "sweep.t: unknown key"));
}

TEST_CASE("a plain scenario is a one-run matrix") {
  const auto m = parse_matrix(kMinimalSc, ".");
  const auto runs = expand(m);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].config == parse_config(kMinimalSc, "."));
}

TEST_CASE("config round trip: parse, serialize, parse") {
  const auto m = load_matrix(test_support::data_dir() / "paper_s5.json");
  for (const auto& r : expand(m)) {
    CAPTURE(r.key);
    const auto again = parse_config(serialize_config(r.config), test_support::data_dir());
    CHECK(again == r.config);
    CHECK(serialize_config(again) == serialize_config(r.config));
  }
  // Randomized configs over the whole parameter space.
  RandomStream rng(31);
  for (int i = 0; i < 200; ++i) {
    ScenarioConfig c;
    const Mode modes[] = {Mode::kSC, Mode::kDcNoR, Mode::kDcReo, Mode::kDcDup};
    c.mode = modes[rng.below(4)];
    const std::size_t n = c.mode == Mode::kSC ? 1 : 2 + rng.below(2);
    for (std::size_t k = 0; k < n; ++k) {
      auto p = test_support::constant_path(std::string(1, static_cast<char>('A' + k)),
                                           1 + static_cast<double>(rng.below(300)) / 7.0,
                                           static_cast<double>(rng.below(40)) / 3.0);
      p.cqi_samples = {static_cast<int>(rng.below(16)), static_cast<int>(rng.below(16))};
      p.trace.cqi = p.cqi_samples;
      p.loss_prob = rng.uniform();
      p.queue_limit_pdus = 2 + static_cast<int>(rng.below(1000));
      c.paths.push_back(p);
    }
    c.reordering = c.mode == Mode::kDcReo || c.mode == Mode::kDcDup ||
                   (c.mode == Mode::kSC && rng.bernoulli(0.5));
    c.policy = c.mode == Mode::kDcDup ? FlowPolicy::kDuplicate
                                      : (rng.bernoulli(0.5) ? FlowPolicy::kQueueAware
                                                            : FlowPolicy::kRoundRobin);
    c.t_reordering_ms = static_cast<double>(rng.below(2000)) / 8.0;
    c.feedback_delay_ms = rng.uniform() * 5;
    c.traffic.type = rng.bernoulli(0.5) ? TrafficType::kTcp : TrafficType::kUdp;
    c.traffic.udp_rate_mbps = rng.uniform() * 100;
    c.seed = rng.next_u64();
    c.sn_len = std::array{7, 12, 15, 18}[rng.below(4)];
    c.duration_s = 0.5 + static_cast<double>(rng.below(100));
    c.output.format = std::array{"csv", "json", "both"}[rng.below(3)];
    validate(c);
    const auto again = parse_config(serialize_config(c), ".");
    CHECK(again == c);
  }
}

}  // TEST_SUITE
