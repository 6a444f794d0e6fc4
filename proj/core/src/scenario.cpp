// SPDX-License-Identifier: Apache-2.0

#include "mcsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcsim {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kSC: return "SC";
    case Mode::kDcNoR: return "DC_NoR";
    case Mode::kDcReo: return "DC_Reo";
    case Mode::kDcDup: return "DC_Dup";
  }
  return "unknown";
}

std::string_view to_string(TrafficType type) {
  return type == TrafficType::kTcp ? "tcp" : "udp";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "SC") return Mode::kSC;
  if (name == "DC_NoR") return Mode::kDcNoR;
  if (name == "DC_Reo") return Mode::kDcReo;
  if (name == "DC_Dup") return Mode::kDcDup;
  return std::nullopt;
}

std::optional<TrafficType> parse_traffic_type(std::string_view name) {
  if (name == "tcp") return TrafficType::kTcp;
  if (name == "udp") return TrafficType::kUdp;
  return std::nullopt;
}

namespace {

[[noreturn]] void fail(const std::string& key_path, const std::string& what) {
  throw ConfigError(key_path + ": " + what);
}

std::string child(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string indexed(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

void check_keys(const ojson& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(child(where, key), "unknown key");
    }
  }
}

template <typename T>
void read(const ojson& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(child(where, key), "wrong type");
  }
}

std::string read_enum_name(const ojson& obj, const char* key, const std::string& where) {
  std::string s;
  read(obj, key, where, s);
  return s;
}

bool mode_requires_reordering(Mode m) { return m == Mode::kDcReo || m == Mode::kDcDup; }

std::optional<bool> mode_fixed_reordering(Mode m) {
  if (m == Mode::kDcNoR) return false;
  if (mode_requires_reordering(m)) return true;
  return std::nullopt;
}

PathConfig parse_path(const ojson& pj, const std::string& where,
                      const std::filesystem::path& base_dir) {
  check_keys(pj, where,
             {"id", "trace", "cqi", "peak_rate_mbps", "backhaul_delay_ms", "prop_delay_ms",
              "queue_limit_pdus", "loss_prob"});
  PathConfig p;
  read(pj, "id", where, p.id);
  if (p.id.empty()) fail(child(where, "id"), "missing or empty");
  read(pj, "trace", where, p.trace_file);
  read(pj, "cqi", where, p.cqi_samples);
  if (!pj.contains("peak_rate_mbps")) fail(child(where, "peak_rate_mbps"), "missing");
  read(pj, "peak_rate_mbps", where, p.peak_rate_mbps);
  read(pj, "backhaul_delay_ms", where, p.backhaul_delay_ms);
  read(pj, "prop_delay_ms", where, p.prop_delay_ms);
  read(pj, "queue_limit_pdus", where, p.queue_limit_pdus);
  read(pj, "loss_prob", where, p.loss_prob);

  if (p.trace_file.empty() == p.cqi_samples.empty()) {
    fail(where, "exactly one of `trace` (file) or `cqi` (inline samples) is required");
  }
  if (!p.trace_file.empty()) {
    std::filesystem::path f(p.trace_file);
    if (f.is_relative()) f = base_dir / f;
    try {
      p.trace = load_trace(f);
    } catch (const TraceError& e) {
      fail(child(where, "trace"), e.what());
    }
    p.trace.label = p.trace_file;
  } else {
    std::string text;
    for (std::size_t i = 0; i < p.cqi_samples.size(); ++i) {
      text += std::to_string(i) + "," + std::to_string(p.cqi_samples[i]) + "\n";
    }
    try {
      p.trace = parse_trace(text, "inline");
    } catch (const TraceError& e) {
      fail(child(where, "cqi"), e.what());
    }
  }
  return p;
}

ScenarioConfig parse_scenario_object(const ojson& j, const std::string& where,
                                     const std::filesystem::path& base_dir) {
  check_keys(j, where,
             {"name", "mode", "paths", "policy", "feedback_delay_ms", "reordering",
              "t_reordering_ms", "traffic", "tcp", "duration_s", "seed", "sn_len", "output"});
  ScenarioConfig cfg;
  read(j, "name", where, cfg.name);

  const std::string mode_name = read_enum_name(j, "mode", where);
  if (mode_name.empty()) fail(child(where, "mode"), "missing");
  const auto mode = parse_mode(mode_name);
  if (!mode) fail(child(where, "mode"), "unknown mode `" + mode_name + "`");
  cfg.mode = *mode;

  if (!j.contains("paths") || !j["paths"].is_array()) fail(child(where, "paths"), "missing path list");
  const auto& paths = j["paths"];
  for (std::size_t i = 0; i < paths.size(); ++i) {
    cfg.paths.push_back(parse_path(paths[i], indexed(child(where, "paths"), i), base_dir));
  }

  bool policy_given = false;
  if (j.contains("policy")) {
    const std::string name = read_enum_name(j, "policy", where);
    const auto policy = parse_flow_policy(name);
    if (!policy) fail(child(where, "policy"), "unknown policy `" + name + "`");
    cfg.policy = *policy;
    policy_given = true;
  }
  if (cfg.mode == Mode::kDcDup && !policy_given) cfg.policy = FlowPolicy::kDuplicate;

  read(j, "feedback_delay_ms", where, cfg.feedback_delay_ms);
  const auto fixed = mode_fixed_reordering(cfg.mode);
  cfg.reordering = fixed.value_or(cfg.mode != Mode::kSC);
  if (j.contains("reordering")) {
    const std::string r = read_enum_name(j, "reordering", where);
    if (r != "on" && r != "off") fail(child(where, "reordering"), "expected `on` or `off`");
    cfg.reordering = r == "on";
  }
  read(j, "t_reordering_ms", where, cfg.t_reordering_ms);

  if (j.contains("traffic")) {
    const auto& tj = j["traffic"];
    const std::string tw = child(where, "traffic");
    check_keys(tj, tw, {"type", "udp_rate_mbps", "sdu_bytes", "stop_s", "max_sdus"});
    if (tj.contains("type")) {
      const std::string name = read_enum_name(tj, "type", tw);
      const auto type = parse_traffic_type(name);
      if (!type) fail(child(tw, "type"), "expected `tcp` or `udp`");
      cfg.traffic.type = *type;
    }
    read(tj, "udp_rate_mbps", tw, cfg.traffic.udp_rate_mbps);
    read(tj, "sdu_bytes", tw, cfg.traffic.sdu_bytes);
    read(tj, "stop_s", tw, cfg.traffic.stop_s);
    read(tj, "max_sdus", tw, cfg.traffic.max_sdus);
  }
  if (j.contains("tcp")) {
    const auto& tj = j["tcp"];
    const std::string tw = child(where, "tcp");
    check_keys(tj, tw,
               {"initial_cwnd", "initial_ssthresh", "initial_rto_ms", "min_rto_ms", "max_rto_ms",
                "uplink_delay_ms", "rwnd_segments"});
    read(tj, "initial_cwnd", tw, cfg.tcp.initial_cwnd);
    read(tj, "initial_ssthresh", tw, cfg.tcp.initial_ssthresh);
    read(tj, "initial_rto_ms", tw, cfg.tcp.initial_rto_ms);
    read(tj, "min_rto_ms", tw, cfg.tcp.min_rto_ms);
    read(tj, "max_rto_ms", tw, cfg.tcp.max_rto_ms);
    read(tj, "uplink_delay_ms", tw, cfg.tcp.uplink_delay_ms);
    read(tj, "rwnd_segments", tw, cfg.tcp.rwnd_segments);
  }
  read(j, "duration_s", where, cfg.duration_s);
  read(j, "seed", where, cfg.seed);
  read(j, "sn_len", where, cfg.sn_len);
  if (j.contains("output")) {
    const auto& oj = j["output"];
    const std::string ow = child(where, "output");
    check_keys(oj, ow, {"dir", "format"});
    read(oj, "dir", ow, cfg.output.dir);
    read(oj, "format", ow, cfg.output.format);
  }
  return cfg;
}

ojson parse_json(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_ms(double ms) {
  if (std::floor(ms) == ms) return std::to_string(static_cast<long long>(ms));
  std::ostringstream os;
  os << ms;
  return os.str();
}

}  // namespace

void validate(ScenarioConfig& cfg) {
  if (cfg.paths.empty()) fail("paths", "at least one path is required");
  if (cfg.mode == Mode::kSC && cfg.paths.size() != 1) {
    fail("mode", "SC requires exactly 1 path, got " + std::to_string(cfg.paths.size()));
  }
  if (cfg.mode != Mode::kSC && cfg.paths.size() < 2) {
    fail("mode", std::string(to_string(cfg.mode)) + " requires at least 2 paths");
  }
  if (const auto fixed = mode_fixed_reordering(cfg.mode); fixed && *fixed != cfg.reordering) {
    fail("reordering", std::string(to_string(cfg.mode)) + " requires reordering " +
                           (*fixed ? "on" : "off"));
  }
  if (cfg.mode == Mode::kDcDup && cfg.policy != FlowPolicy::kDuplicate) {
    fail("policy", "DC_Dup requires policy `duplicate`");
  }
  if (cfg.mode != Mode::kDcDup && cfg.policy == FlowPolicy::kDuplicate) {
    fail("policy", "policy `duplicate` is only valid with mode DC_Dup");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cfg.paths.size(); ++i) {
    auto& p = cfg.paths[i];
    const std::string where = indexed("paths", i);
    if (!ids.insert(p.id).second) fail(child(where, "id"), "duplicate path id `" + p.id + "`");
    if (i == 0) p.backhaul_delay_ms = 0.0;
    if (!(p.peak_rate_mbps >= 0.0)) fail(child(where, "peak_rate_mbps"), "must be >= 0");
    if (!(p.backhaul_delay_ms >= 0.0)) fail(child(where, "backhaul_delay_ms"), "must be >= 0");
    if (!(p.prop_delay_ms >= 0.0)) fail(child(where, "prop_delay_ms"), "must be >= 0");
    if (!(p.loss_prob >= 0.0 && p.loss_prob <= 1.0)) fail(child(where, "loss_prob"), "must be in [0, 1]");
    if (p.queue_limit_pdus < 2) fail(child(where, "queue_limit_pdus"), "must be >= 2");
    if (p.trace.cqi.empty()) fail(child(where, "trace"), "empty trace");
  }
  if (!(cfg.t_reordering_ms >= 0.0)) fail("t_reordering_ms", "must be >= 0");
  if (!(cfg.feedback_delay_ms >= 0.0)) fail("feedback_delay_ms", "must be >= 0");
  if (!(cfg.duration_s > 0.0)) fail("duration_s", "must be > 0");
  if (!valid_sn_len(cfg.sn_len)) fail("sn_len", "must be one of 7, 12, 15, 18");
  if (cfg.traffic.sdu_bytes <= 0 || cfg.traffic.sdu_bytes > PdcpTransmitter::kMaxSduBytes) {
    fail("traffic.sdu_bytes", "must be in (0, " + std::to_string(PdcpTransmitter::kMaxSduBytes) + "]");
  }
  if (!(cfg.traffic.udp_rate_mbps >= 0.0)) fail("traffic.udp_rate_mbps", "must be >= 0");
  if (cfg.traffic.type == TrafficType::kTcp) {
    if (!(cfg.tcp.initial_cwnd >= 1.0)) fail("tcp.initial_cwnd", "must be >= 1");
    if (!(cfg.tcp.initial_ssthresh >= 2.0)) fail("tcp.initial_ssthresh", "must be >= 2");
    if (!(cfg.tcp.min_rto_ms > 0.0)) fail("tcp.min_rto_ms", "must be > 0");
    if (!(cfg.tcp.initial_rto_ms > 0.0)) fail("tcp.initial_rto_ms", "must be > 0");
    if (cfg.tcp.max_rto_ms < cfg.tcp.min_rto_ms) fail("tcp.max_rto_ms", "must be >= min_rto_ms");
    if (!(cfg.tcp.uplink_delay_ms >= 0.0)) fail("tcp.uplink_delay_ms", "must be >= 0");
    if (cfg.tcp.rwnd_segments < 1) fail("tcp.rwnd_segments", "must be >= 1");
  }
  if (cfg.output.format != "csv" && cfg.output.format != "json" && cfg.output.format != "both") {
    fail("output.format", "expected csv, json or both");
  }
}

ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  ScenarioConfig cfg = parse_scenario_object(parse_json(json_text), "", base_dir);
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  return parse_config(read_file(file), file.parent_path());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  ojson j;
  j["name"] = cfg.name;
  j["mode"] = to_string(cfg.mode);
  ojson paths = ojson::array();
  for (const auto& p : cfg.paths) {
    ojson pj;
    pj["id"] = p.id;
    if (!p.trace_file.empty()) {
      pj["trace"] = p.trace_file;
    } else {
      pj["cqi"] = p.cqi_samples;
    }
    pj["peak_rate_mbps"] = p.peak_rate_mbps;
    pj["backhaul_delay_ms"] = p.backhaul_delay_ms;
    pj["prop_delay_ms"] = p.prop_delay_ms;
    pj["queue_limit_pdus"] = p.queue_limit_pdus;
    pj["loss_prob"] = p.loss_prob;
    paths.push_back(std::move(pj));
  }
  j["paths"] = std::move(paths);
  j["policy"] = to_string(cfg.policy);
  j["feedback_delay_ms"] = cfg.feedback_delay_ms;
  j["reordering"] = cfg.reordering ? "on" : "off";
  j["t_reordering_ms"] = cfg.t_reordering_ms;
  j["traffic"] = {{"type", to_string(cfg.traffic.type)},
                  {"udp_rate_mbps", cfg.traffic.udp_rate_mbps},
                  {"sdu_bytes", cfg.traffic.sdu_bytes},
                  {"stop_s", cfg.traffic.stop_s},
                  {"max_sdus", cfg.traffic.max_sdus}};
  j["tcp"] = {{"initial_cwnd", cfg.tcp.initial_cwnd},
              {"initial_ssthresh", cfg.tcp.initial_ssthresh},
              {"initial_rto_ms", cfg.tcp.initial_rto_ms},
              {"min_rto_ms", cfg.tcp.min_rto_ms},
              {"max_rto_ms", cfg.tcp.max_rto_ms},
              {"uplink_delay_ms", cfg.tcp.uplink_delay_ms},
              {"rwnd_segments", cfg.tcp.rwnd_segments}};
  j["duration_s"] = cfg.duration_s;
  j["seed"] = cfg.seed;
  j["sn_len"] = cfg.sn_len;
  j["output"] = {{"dir", cfg.output.dir}, {"format", cfg.output.format}};
  return j.dump(2) + "\n";
}

ExperimentMatrix parse_matrix(const std::string& json_text, const std::filesystem::path& base_dir) {
  const ojson j = parse_json(json_text);
  ExperimentMatrix m;
  if (!j.is_object() || !j.contains("base")) {
    m.base = parse_config(json_text, base_dir);
    return m;
  }
  check_keys(j, "", {"base", "variants", "sweep", "baseline"});
  m.base = parse_scenario_object(j["base"], "base", base_dir);
  read(j, "baseline", "", m.baseline);

  if (j.contains("variants")) {
    const auto& vs = j["variants"];
    if (!vs.is_array()) fail("variants", "expected an array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string where = indexed("variants", i);
      check_keys(vs[i], where, {"key", "mode", "paths", "policy"});
      MatrixVariant v;
      read(vs[i], "key", where, v.key);
      if (v.key.empty()) fail(child(where, "key"), "missing or empty");
      const std::string mode_name = read_enum_name(vs[i], "mode", where);
      const auto mode = parse_mode(mode_name);
      if (!mode) fail(child(where, "mode"), "unknown mode `" + mode_name + "`");
      v.mode = *mode;
      read(vs[i], "paths", where, v.path_ids);
      if (vs[i].contains("policy")) {
        const std::string name = read_enum_name(vs[i], "policy", where);
        const auto policy = parse_flow_policy(name);
        if (!policy) fail(child(where, "policy"), "unknown policy `" + name + "`");
        v.policy = policy;
      }
      m.variants.push_back(std::move(v));
    }
  }
  if (j.contains("sweep")) {
    const auto& sj = j["sweep"];
    check_keys(sj, "sweep", {"t_reordering_ms", "traffic", "seed"});
    read(sj, "t_reordering_ms", "sweep", m.t_reordering_ms);
    read(sj, "seed", "sweep", m.seeds);
    std::vector<std::string> traffic;
    read(sj, "traffic", "sweep", traffic);
    for (std::size_t i = 0; i < traffic.size(); ++i) {
      const auto t = parse_traffic_type(traffic[i]);
      if (!t) fail(indexed("sweep.traffic", i), "expected `tcp` or `udp`");
      m.traffic.push_back(*t);
    }
  }
  if (!m.baseline.empty() &&
      std::none_of(m.variants.begin(), m.variants.end(),
                   [&](const MatrixVariant& v) { return v.key == m.baseline; })) {
    fail("baseline", "no variant named `" + m.baseline + "`");
  }
  expand(m);  // surfaces invariant violations at parse time
  return m;
}

ExperimentMatrix load_matrix(const std::filesystem::path& file) {
  return parse_matrix(read_file(file), file.parent_path());
}

std::vector<ExpandedRun> expand(const ExperimentMatrix& matrix) {
  std::vector<MatrixVariant> variants = matrix.variants;
  const bool plain = variants.empty();
  if (plain) variants.push_back(MatrixVariant{matrix.base.name, matrix.base.mode, {}, std::nullopt});

  const std::vector<TrafficType> traffic =
      matrix.traffic.empty() ? std::vector<TrafficType>{matrix.base.traffic.type} : matrix.traffic;
  const std::vector<std::uint64_t> seeds =
      matrix.seeds.empty() ? std::vector<std::uint64_t>{matrix.base.seed} : matrix.seeds;

  std::vector<ExpandedRun> runs;
  std::set<std::string> keys;
  for (const auto& v : variants) {
    ScenarioConfig cfg = matrix.base;
    if (!plain) {
      cfg.mode = v.mode;
      if (!v.path_ids.empty()) {
        cfg.paths.clear();
        for (const auto& id : v.path_ids) {
          auto it = std::find_if(matrix.base.paths.begin(), matrix.base.paths.end(),
                                 [&](const PathConfig& p) { return p.id == id; });
          if (it == matrix.base.paths.end()) fail("variants." + v.key, "unknown path id `" + id + "`");
          cfg.paths.push_back(*it);
        }
      }
      cfg.reordering = mode_fixed_reordering(cfg.mode).value_or(cfg.mode != Mode::kSC);
      if (v.policy) {
        cfg.policy = *v.policy;
      } else if (cfg.mode == Mode::kDcDup) {
        cfg.policy = FlowPolicy::kDuplicate;
      } else if (cfg.policy == FlowPolicy::kDuplicate) {
        cfg.policy = FlowPolicy::kRoundRobin;
      }
    }
    const bool sweep_timer = cfg.reordering && cfg.mode != Mode::kSC && !matrix.t_reordering_ms.empty();
    const std::vector<double> timers =
        sweep_timer ? matrix.t_reordering_ms : std::vector<double>{cfg.t_reordering_ms};

    for (double t : timers) {
      for (TrafficType tt : traffic) {
        for (std::uint64_t seed : seeds) {
          ScenarioConfig run = cfg;
          run.t_reordering_ms = t;
          run.traffic.type = tt;
          run.seed = seed;
          std::string key = v.key;
          if (sweep_timer) key += "_t" + format_ms(t);
          if (!matrix.traffic.empty()) key += "_" + std::string(to_string(tt));
          if (seeds.size() > 1) key += "_s" + std::to_string(seed);
          run.name = key;
          try {
            validate(run);
          } catch (const ConfigError& e) {
            throw ConfigError("run `" + key + "`: " + e.what());
          }
          if (!keys.insert(key).second) fail("variants", "duplicate run key `" + key + "`");
          runs.push_back(ExpandedRun{key, v.key, std::move(run)});
        }
      }
    }
  }
  return runs;
}

}  // namespace mcsim
