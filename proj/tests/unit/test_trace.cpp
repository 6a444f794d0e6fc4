// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mcsim/trace.hpp"
#include "test_support.hpp"

using namespace mcsim;

TEST_SUITE("trace") {

TEST_CASE("parse two rows without a header") {
  const auto t = parse_trace("0,15\n1,12", "x");
  CHECK(t.cqi == std::vector<int>{15, 12});
  CHECK_FALSE(t.has_header);
}

TEST_CASE("parse errors name the line") {
  auto message = [](const std::string& text) {
    try {
      parse_trace(text, "t.csv");
    } catch (const TraceError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("0,16") == "t.csv: line 1: cqi 16 out of range [0, 15]");
  CHECK(message("second,cqi\n0,3\n0,4\n").find("line 3") != std::string::npos);
  CHECK(message("0,3\n2,4\n").find("line 2: second 2 out of sequence") != std::string::npos);
  CHECK(message("0,3\nfoo\n").find("line 2") != std::string::npos);
  CHECK(message("0,3\n1,x\n").find("line 2: malformed") != std::string::npos);
  CHECK(message("0,-1\n").find("out of range") != std::string::npos);
  CHECK(message("second,cqi\n").find("no samples") != std::string::npos);
  CHECK(message("1,3\n").find("line 1") != std::string::npos);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv"), TraceError);
}

TEST_CASE("shipped fixtures match their manifests") {
  for (const char* name : {"pedestrian_a", "pedestrian_b"}) {
    CAPTURE(name);
    const auto dir = test_support::data_dir() / "traces";
    const auto t = load_trace(dir / (std::string(name) + ".csv"));
    std::ifstream in(dir / (std::string(name) + ".manifest.json"));
    REQUIRE(in);
    const auto j = nlohmann::json::parse(in);
    const auto s = summarize(t, CqiRateTable::lte_default());
    CHECK(t.size() == 30);
    CHECK(s.samples == j.at("samples").get<std::size_t>());
    CHECK(s.min_cqi == j.at("min_cqi").get<int>());
    CHECK(s.max_cqi == j.at("max_cqi").get<int>());
    CHECK(s.mean_cqi == doctest::Approx(j.at("mean_cqi").get<double>()));
    CHECK(s.mean_normalized_rate == doctest::Approx(j.at("mean_normalized_rate").get<double>()));

    // The fixture is reproducible from its recorded generator parameters.
    const auto& g = j.at("generator");
    RandomWalkParams p;
    p.seed = g.at("seed").get<std::uint64_t>();
    p.seconds = g.at("seconds").get<int>();
    p.start_cqi = g.at("start_cqi").get<int>();
    p.min_cqi = g.at("min_cqi").get<int>();
    p.max_cqi = g.at("max_cqi").get<int>();
    CHECK(generate_random_walk(p).cqi == t.cqi);

    // Peak rate scaled so the mean capacity hits the target.
    CHECK(j.at("peak_rate_mbps").get<double>() * s.mean_normalized_rate ==
          doctest::Approx(j.at("target_mean_mbps").get<double>()));
  }
}

TEST_CASE("fixture pair sums to a 27 Mb/s mean capacity") {
  const auto dir = test_support::data_dir() / "traces";
  double sum = 0.0;
  for (const char* name : {"pedestrian_a", "pedestrian_b"}) {
    std::ifstream in(dir / (std::string(name) + ".manifest.json"));
    sum += nlohmann::json::parse(in).at("target_mean_mbps").get<double>();
  }
  CHECK(sum == doctest::Approx(27.0));
}

TEST_CASE("default table is the LTE efficiency ladder") {
  const auto table = CqiRateTable::lte_default();
  CHECK(table.normalized(0) == 0.0);
  CHECK(table.normalized(15) == 1.0);
  CHECK(table.normalized(7) == doctest::Approx(1.4766 / 5.5547));
  CHECK(table.normalized(1) == doctest::Approx(0.1523 / 5.5547));
  for (int c = 1; c <= 15; ++c) CHECK(table.normalized(c) > table.normalized(c - 1));
}

TEST_CASE("rate table validation") {
  std::array<double, 16> e{};
  for (int i = 0; i < 16; ++i) e[i] = i / 15.0;
  CHECK_NOTHROW(CqiRateTable{e});
  auto bad = e;
  bad[0] = 0.1;
  CHECK_THROWS_AS(CqiRateTable{bad}, TraceError);
  bad = e;
  bad[9] = 0.1;
  CHECK_THROWS_AS(CqiRateTable{bad}, TraceError);
}

TEST_CASE("rate_at examples") {
  const auto table = CqiRateTable::lte_default();
  SUBCASE("cqi 0 gives zero") {
    CHECK(rate_at(parse_trace("0,0\n"), table, 15e6, SimTime::ms(300)) == 0.0);
  }
  SUBCASE("single sample is a constant link") {
    const auto t = parse_trace("0,9\n");
    const double r = rate_at(t, table, 15e6, SimTime{});
    CHECK(r > 0.0);
    for (std::int64_t s : {1, 2, 17, 1000}) CHECK(rate_at(t, table, 15e6, SimTime::sec(s)) == r);
  }
  SUBCASE("peak scale 15 Mb/s at a cqi-15 second") {
    const double scale = 15e6 / table.normalized(15);
    const auto t = parse_trace("0,10\n1,15\n");
    CHECK(rate_at(t, table, scale, SimTime::ms(1500)) == doctest::Approx(15e6));
  }
}

TEST_CASE("rate_at is piecewise constant and bounded") {
  const auto table = CqiRateTable::lte_default();
  const auto t = generate_random_walk({.seed = 99, .seconds = 20, .start_cqi = 8, .min_cqi = 0,
                                       .max_cqi = 15});
  const double peak = 20e6;
  RandomStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto us = static_cast<std::int64_t>(rng.below(60'000'000));
    const SimTime at{us};
    const double r = rate_at(t, table, peak, at);
    CHECK(r >= 0.0);
    CHECK(r <= peak);
    const SimTime second_start = SimTime::sec(at.whole_seconds());
    CHECK(rate_at(t, table, peak, second_start) == r);
    CHECK(rate_at(t, table, peak, second_start + SimTime::us(999'999)) == r);
  }
}

TEST_CASE("traces wrap cyclically") {
  const auto t = parse_trace("0,3\n1,7\n2,11\n");
  CHECK(t.cqi_at_second(0) == 3);
  CHECK(t.cqi_at_second(3) == 3);
  CHECK(t.cqi_at_second(5) == 11);
  CHECK(t.cqi_at_second(301) == 7);
}

TEST_CASE("integrated capacity") {
  const auto table = CqiRateTable::lte_default();
  const auto t = parse_trace("0,15\n1,0\n");
  CHECK(integrated_capacity_bits(t, table, 10e6, SimTime::sec(4)) == doctest::Approx(20e6));
  CHECK(integrated_capacity_bits(t, table, 10e6, SimTime::ms(2500)) == doctest::Approx(15e6));
  CHECK(mean_normalized_rate(t, table, 4) == doctest::Approx(0.5));
}

TEST_CASE("next nonzero second") {
  const auto table = CqiRateTable::lte_default();
  const auto t = parse_trace("0,5\n1,0\n2,0\n3,4\n");
  CHECK(next_nonzero_second(t, table, 0) == 0);
  CHECK(next_nonzero_second(t, table, 1) == 3);
  CHECK(next_nonzero_second(t, table, 4) == 4);
  CHECK_FALSE(next_nonzero_second(parse_trace("0,0\n"), table, 0).has_value());
}

TEST_CASE("load then serialize is byte-identical") {
  const auto dir = test_support::scratch_dir("trace_roundtrip");
  for (const std::string text : {"second,cqi\n0,15\n1,12\n", "0,1\n1,2\n2,3\n"}) {
    const auto f = dir / "t.csv";
    {
      std::ofstream out(f, std::ios::binary);
      out << text;
    }
    CHECK(serialize_trace(load_trace(f)) == text);
  }
  // Shipped fixtures too.
  for (const char* name : {"pedestrian_a.csv", "pedestrian_b.csv"}) {
    const auto f = test_support::data_dir() / "traces" / name;
    std::ifstream in(f, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(serialize_trace(load_trace(f)) == buf.str());
  }
}

TEST_CASE("random walk stays within bounds and moves by at most one") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = generate_random_walk({.seed = seed, .seconds = 200});
    CHECK(t.cqi.front() == 12);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(t.cqi[i] >= 6);
      CHECK(t.cqi[i] <= 15);
      if (i > 0) CHECK(std::abs(t.cqi[i] - t.cqi[i - 1]) <= 1);
    }
  }
  CHECK_THROWS_AS(generate_random_walk({.seconds = 0}), TraceError);
  CHECK_THROWS_AS(generate_random_walk({.min_cqi = 9, .max_cqi = 8}), TraceError);
}

}  // TEST_SUITE
