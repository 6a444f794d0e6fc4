// SPDX-License-Identifier: Apache-2.0
//
// mcsim command-line interface.
//
//   mcsim run <config>        run one scenario
//   mcsim sweep <config>      expand and run an experiment matrix
//   mcsim validate <config>   parse and check a scenario or matrix
//   mcsim gen-trace ...       generate a random-walk CQI trace
//
// Exit codes: 0 success, 1 configuration error, 2 run error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcsim/runner.hpp"
#include "mcsim/scenario.hpp"
#include "mcsim/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
};

std::filesystem::path resolve_out_dir(const GlobalOptions& g, const mcsim::ScenarioConfig& cfg) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("MCSIM_OUT_DIR"); env && *env) return env;
  return cfg.output.dir;
}

std::string resolve_format(const GlobalOptions& g, const mcsim::ScenarioConfig& cfg) {
  return g.format.empty() ? cfg.output.format : g.format;
}

void apply_overrides(const GlobalOptions& g, mcsim::ExperimentMatrix& m) {
  if (g.seed) {
    m.base.seed = *g.seed;
    m.seeds.clear();
  }
}

int cmd_validate(const std::string& file) {
  const auto matrix = mcsim::load_matrix(file);
  const auto runs = mcsim::expand(matrix);
  std::cout << file << ": ok (" << runs.size() << (runs.size() == 1 ? " run" : " runs") << ")\n";
  for (const auto& r : runs) std::cout << "  " << r.key << '\n';
  return kExitOk;
}

int cmd_run(const std::string& file, const GlobalOptions& g) {
  auto matrix = mcsim::load_matrix(file);
  apply_overrides(g, matrix);
  const auto runs = mcsim::expand(matrix);
  if (runs.size() != 1) {
    std::cerr << file << ": expands to " << runs.size() << " runs; use `mcsim sweep`\n";
    return kExitConfig;
  }
  const auto& run = runs.front();
  mcsim::RunMetrics m;
  try {
    m = mcsim::run_scenario(run.config, run.key);
  } catch (const std::exception& e) {
    std::cerr << run.key << ": run failed: " << e.what() << '\n';
    return kExitRun;
  }
  const auto written = mcsim::write_run_outputs(m, run.config, resolve_out_dir(g, run.config),
                                                resolve_format(g, run.config));
  std::cout << run.key << ": goodput " << m.mean_goodput_bps / 1e6 << " Mb/s over "
            << m.duration_s << " s\n";
  for (const auto& f : written) std::cout << "  wrote " << f.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& file, const GlobalOptions& g, unsigned jobs) {
  auto matrix = mcsim::load_matrix(file);
  apply_overrides(g, matrix);
  const auto runs = mcsim::expand(matrix);
  const auto outcomes = mcsim::run_matrix(runs, jobs);
  const auto dir = resolve_out_dir(g, matrix.base);
  const auto format = resolve_format(g, matrix.base);
  bool failed = false;
  for (const auto& o : outcomes) {
    if (!o.metrics) {
      failed = true;
      std::cerr << o.key << ": run failed: " << o.error << '\n';
      continue;
    }
    mcsim::write_run_outputs(*o.metrics, o.config, dir, format);
    std::cout << o.key << ": goodput " << o.metrics->mean_goodput_bps / 1e6 << " Mb/s\n";
  }
  mcsim::write_file(dir / "summary.csv", mcsim::summary_csv(outcomes, matrix.baseline));
  std::cout << "wrote " << (dir / "summary.csv").string() << '\n';
  return failed ? kExitRun : kExitOk;
}

struct GenTraceOptions {
  mcsim::RandomWalkParams walk;
  std::string out;
  std::string manifest;
  double target_mean_mbps = 0.0;
};

int cmd_gen_trace(const GenTraceOptions& o) {
  const auto trace = mcsim::generate_random_walk(o.walk);
  mcsim::save_trace(trace, o.out);
  const auto table = mcsim::CqiRateTable::lte_default();
  const auto s = mcsim::summarize(trace, table);
  nlohmann::ordered_json j;
  j["trace"] = std::filesystem::path(o.out).filename().string();
  j["generator"] = {{"kind", "random_walk"},
                    {"seed", o.walk.seed},
                    {"seconds", o.walk.seconds},
                    {"start_cqi", o.walk.start_cqi},
                    {"min_cqi", o.walk.min_cqi},
                    {"max_cqi", o.walk.max_cqi}};
  j["samples"] = s.samples;
  j["min_cqi"] = s.min_cqi;
  j["max_cqi"] = s.max_cqi;
  j["mean_cqi"] = s.mean_cqi;
  j["mean_normalized_rate"] = s.mean_normalized_rate;
  if (o.target_mean_mbps > 0.0 && s.mean_normalized_rate > 0.0) {
    j["target_mean_mbps"] = o.target_mean_mbps;
    j["peak_rate_mbps"] = o.target_mean_mbps / s.mean_normalized_rate;
  }
  const std::string manifest = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
  mcsim::write_file(manifest, j.dump(2) + "\n");
  std::cout << "wrote " << o.out << " and " << manifest << " (cqi " << s.min_cqi << ".."
            << s.max_cqi << ", mean " << s.mean_cqi << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcsim: PDCP multi-connectivity discrete-event simulator"};
  app.require_subcommand(1);

  GlobalOptions g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides MCSIM_OUT_DIR and config)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));

  std::string config;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Scenario JSON")->required();
  run->fallthrough();

  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run an experiment matrix");
  sweep->add_option("config", config, "Matrix or scenario JSON")->required();
  sweep->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  sweep->fallthrough();

  auto* validate = app.add_subcommand("validate", "Check a scenario or matrix");
  validate->add_option("config", config, "Scenario or matrix JSON")->required();
  validate->fallthrough();

  GenTraceOptions gt;
  auto* gen = app.add_subcommand("gen-trace", "Generate a random-walk CQI trace");
  gen->add_option("--seconds", gt.walk.seconds, "Trace length")->check(CLI::PositiveNumber);
  gen->add_option("--out", gt.out, "Output CSV")->required();
  gen->add_option("--start", gt.walk.start_cqi, "Initial CQI")->check(CLI::Range(0, 15));
  gen->add_option("--min", gt.walk.min_cqi, "Lowest CQI")->check(CLI::Range(0, 15));
  gen->add_option("--max", gt.walk.max_cqi, "Highest CQI")->check(CLI::Range(0, 15));
  gen->add_option("--manifest", gt.manifest, "Manifest path (default <out>.manifest.json)");
  gen->add_option("--target-mean-mbps", gt.target_mean_mbps,
                  "Record the peak rate giving this mean capacity");
  gen->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(config, g);
    if (*sweep) return cmd_sweep(config, g, jobs);
    if (*validate) return cmd_validate(config);
    if (*gen) {
      if (g.seed) gt.walk.seed = *g.seed;
      return cmd_gen_trace(gt);
    }
  } catch (const mcsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mcsim::TraceError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
  return kExitOk;
}
