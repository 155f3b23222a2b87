#include "npca/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "npca/ctmc.hpp"
#include "npca/des.hpp"
#include "npca/errors.hpp"
#include "npca/version.hpp"

namespace npca {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

BssSpec make_bss(const std::string& id, int first_unit, int n_units,
                 int primary, double distance) {
  BssSpec b;
  b.id = id;
  b.allocation = BandSet::block(first_unit, n_units);
  b.primary_unit = primary;
  b.distance_m = distance;
  return b;
}

inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
}

std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---- JSON loading ------------------------------------------------------

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError(path.empty() ? "unknown key " + item.key()
                                     : "unknown key " + path + "." +
                                           item.key());
}

double num_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

long long int_at(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<long long>();
}

bool bool_at(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string str_at(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

BssSpec parse_bss(const json& jb, const std::string& path) {
  if (!jb.is_object()) throw ConfigError(path + ": expected an object");
  static const std::set<std::string> allowed = {
      "id",     "first_unit", "n_units", "primary_unit", "npca",
      "cw_min", "cw_max",     "alpha",   "delta",        "mcs",
      "distance_m", "n_ss",   "payload_bits"};
  reject_unknown(jb, allowed, path);
  BssSpec b;
  if (!jb.contains("id")) throw ConfigError(path + ".id is required");
  b.id = str_at(jb.at("id"), path + ".id");
  if (!jb.contains("n_units")) throw ConfigError(path + ".n_units is required");
  long long n_units = int_at(jb.at("n_units"), path + ".n_units");
  long long first = 0;
  if (jb.contains("first_unit"))
    first = int_at(jb.at("first_unit"), path + ".first_unit");
  try {
    b.allocation =
        BandSet::block(static_cast<int>(first), static_cast<int>(n_units));
  } catch (const ConfigError&) {
    throw ConfigError(path + ": first_unit/n_units out of range");
  }
  b.primary_unit = static_cast<int>(first);
  if (jb.contains("primary_unit"))
    b.primary_unit =
        static_cast<int>(int_at(jb.at("primary_unit"), path + ".primary_unit"));
  if (jb.contains("npca")) b.npca_enabled = bool_at(jb.at("npca"), path + ".npca");
  if (jb.contains("cw_min"))
    b.cw_min = static_cast<int>(int_at(jb.at("cw_min"), path + ".cw_min"));
  if (jb.contains("cw_max"))
    b.cw_max = static_cast<int>(int_at(jb.at("cw_max"), path + ".cw_max"));
  if (jb.contains("alpha")) b.alpha = num_at(jb.at("alpha"), path + ".alpha");
  if (jb.contains("delta")) b.delta = int_at(jb.at("delta"), path + ".delta");
  if (jb.contains("mcs"))
    b.mcs_index = static_cast<int>(int_at(jb.at("mcs"), path + ".mcs"));
  if (jb.contains("distance_m"))
    b.distance_m = num_at(jb.at("distance_m"), path + ".distance_m");
  if (jb.contains("n_ss"))
    b.n_ss = static_cast<int>(int_at(jb.at("n_ss"), path + ".n_ss"));
  if (jb.contains("payload_bits"))
    b.payload_bits = int_at(jb.at("payload_bits"), path + ".payload_bits");
  return b;
}

void parse_phy(const json& jp, PhyParams& phy) {
  if (!jp.is_object()) throw ConfigError("phy: expected an object");
  static const std::set<std::string> allowed = {
      "slot_time",     "difs",        "sifs",
      "ofdm_symbol",   "legacy_preamble", "he_preamble",
      "rts_bits",      "cts_bits",    "back_bits",
      "mac_header_bits", "mpdu_delimiter_bits", "tail_bits",
      "control_rate",  "t_npca",      "t_switch",
      "t_max",         "per",         "t_collision",
      "ctrl_overhead_override"};
  reject_unknown(jp, allowed, "phy");
  auto num = [&](const char* k, double& slot) {
    if (jp.contains(k)) slot = num_at(jp.at(k), std::string("phy.") + k);
  };
  auto bits = [&](const char* k, int& slot) {
    if (jp.contains(k))
      slot = static_cast<int>(int_at(jp.at(k), std::string("phy.") + k));
  };
  num("slot_time", phy.slot_time);
  num("difs", phy.difs);
  num("sifs", phy.sifs);
  num("ofdm_symbol", phy.ofdm_symbol);
  num("legacy_preamble", phy.legacy_preamble);
  num("he_preamble", phy.he_preamble);
  bits("rts_bits", phy.rts_bits);
  bits("cts_bits", phy.cts_bits);
  bits("back_bits", phy.back_bits);
  bits("mac_header_bits", phy.mac_header_bits);
  bits("mpdu_delimiter_bits", phy.mpdu_delimiter_bits);
  bits("tail_bits", phy.tail_bits);
  num("control_rate", phy.control_rate);
  num("t_npca", phy.t_npca);
  num("t_switch", phy.t_switch);
  num("t_max", phy.t_max);
  num("per", phy.per);
  num("t_collision", phy.t_collision);
  if (jp.contains("ctrl_overhead_override")) {
    double v = num_at(jp.at("ctrl_overhead_override"),
                      "phy.ctrl_overhead_override");
    phy.ctrl_overhead_override = v;
  }
}

void parse_randomizers(const json& jr, Randomizers& r) {
  if (!jr.is_object()) throw ConfigError("randomizers: expected an object");
  static const std::set<std::string> allowed = {"distance_range",
                                                "delta_range"};
  reject_unknown(jr, allowed, "randomizers");
  if (jr.contains("distance_range")) {
    const json& a = jr.at("distance_range");
    if (!a.is_array() || a.size() != 2)
      throw ConfigError("randomizers.distance_range: expected [min, max]");
    r.distance_active = true;
    r.distance_min = num_at(a[0], "randomizers.distance_range[0]");
    r.distance_max = num_at(a[1], "randomizers.distance_range[1]");
  }
  if (jr.contains("delta_range")) {
    const json& a = jr.at("delta_range");
    if (!a.is_array() || a.size() != 2)
      throw ConfigError("randomizers.delta_range: expected [min, max]");
    r.delta_active = true;
    r.delta_min = int_at(a[0], "randomizers.delta_range[0]");
    r.delta_max = int_at(a[1], "randomizers.delta_range[1]");
  }
}

// ---- Per-instance evaluation -------------------------------------------

struct InstanceResult {
  std::vector<double> throughput_bps;
  std::vector<double> delay_s;
  std::vector<double> collision;  // empty for the analytic engine
};

InstanceResult eval_ctmc(const Scenario& sc) {
  ChainSkeleton chain = enumerate_states(sc);
  GeneratorMatrix gen = build_generator(chain);
  StationaryDistribution pi = stationary(gen);
  InstanceResult r;
  r.throughput_bps = throughput(pi, chain);
  r.delay_s = access_delay_closed_form(pi, chain);
  return r;
}

InstanceResult eval_des(const Scenario& sc, double duration,
                        std::uint64_t seed) {
  DesOptions o;
  o.duration = duration;
  o.seed = seed;
  DesMetrics m = run_des(sc, o);
  InstanceResult r;
  for (const auto& p : m.per_bss) {
    r.throughput_bps.push_back(p.throughput_bps);
    r.delay_s.push_back(p.mean_delay_s);
    r.collision.push_back(p.collision_prob);
  }
  return r;
}

GridPoint evaluate_point(const ScenarioConfig& config, Engine engine,
                         const McOptions& options) {
  GridPoint point;
  size_t n_bss = config.scenario.bsses.size();
  std::vector<std::vector<double>> thr(n_bss), del(n_bss), col(n_bss);
  for (long long i = 0; i < config.instances; ++i) {
    Scenario sc = instance_scenario(config, static_cast<std::uint64_t>(i));
    try {
      InstanceResult r =
          engine == Engine::Ctmc
              ? eval_ctmc(sc)
              : eval_des(sc, options.duration,
                         derive_seed(derive_seed(config.seed,
                                                 static_cast<std::uint64_t>(i)),
                                     1));
      for (size_t b = 0; b < n_bss; ++b) {
        thr[b].push_back(r.throughput_bps[b] / 1e6);
        del[b].push_back(r.delay_s[b] * 1e3);
        if (!r.collision.empty()) col[b].push_back(r.collision[b]);
      }
    } catch (const std::exception& e) {
      point.errors.push_back("instance " + std::to_string(i) + ": " +
                             e.what());
    }
  }
  for (size_t b = 0; b < n_bss; ++b) {
    if (thr[b].empty()) continue;  // every instance failed
    BssAggregate agg;
    agg.bss = config.scenario.bsses[b].id;
    agg.throughput_mbps = box_stats(thr[b]);
    agg.delay_ms = box_stats(del[b]);
    if (!col[b].empty()) agg.collision_prob = box_stats(col[b]);
    point.bsses.push_back(std::move(agg));
  }
  return point;
}

void require_valid(const ScenarioConfig& config) {
  std::vector<std::string> diags = validate(config);
  if (diags.empty()) return;
  std::string joined;
  for (const auto& d : diags) {
    if (!joined.empty()) joined += "\n";
    joined += d;
  }
  throw ConfigError(joined);
}

long long parse_ll(const std::string& s, const std::string& what) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not an integer: " + s);
  }
  if (pos != s.size()) throw ConfigError(what + ": not an integer: " + s);
  return v;
}

double parse_d(const std::string& s, const std::string& what) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: " + s);
  }
  if (pos != s.size()) throw ConfigError(what + ": not a number: " + s);
  return v;
}

ordered_json box_json(const BoxStats& b) {
  ordered_json j;
  j["mean"] = b.mean;
  j["median"] = b.median;
  j["q1"] = b.q1;
  j["q3"] = b.q3;
  j["whisker_low"] = b.whisker_low;
  j["whisker_high"] = b.whisker_high;
  j["count"] = b.count;
  j["outliers"] = b.outliers;
  return j;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& which, bool npca,
                                const BuiltinOptions& options) {
  bool has_c = false, has_d = false;
  if (which == "I") {
  } else if (which == "II") {
    has_d = true;
  } else if (which == "III" || which == "Full") {
    has_c = has_d = true;
  } else {
    throw ConfigError("unknown builtin scenario " + which +
                      " (expected I, II, III or Full)");
  }
  ScenarioConfig cfg;
  cfg.scenario.id = which;
  auto& bsses = cfg.scenario.bsses;
  bsses.push_back(make_bss("A", 0, 8, 0, 1.5));
  bsses.back().npca_enabled = npca;
  bsses.push_back(make_bss("B", 0, 4, 0, 17.0));
  if (has_c) {
    bsses.push_back(make_bss("C", 0, 8, 4, 5.0));
    bsses.back().npca_enabled = npca;
  }
  if (has_d) {
    bsses.push_back(make_bss("D", 4, 4, 4, 5.0));
    bsses.back().alpha = options.alpha_d;
  }
  for (auto& b : bsses) {
    if (options.delta) b.delta = *options.delta;
    auto it = options.mcs_override.find(b.id);
    if (it != options.mcs_override.end()) {
      b.mcs_index = it->second;
      b.distance_m.reset();
    }
  }
  // Calibrated control-frame airtime; keeps the aggregation limits at their
  // nominal 968/484/29 values.
  cfg.scenario.phy.ctrl_overhead_override = 274e-6;
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  static const std::set<std::string> allowed = {"scenario", "bsses",   "phy",
                                                "randomizers", "instances",
                                                "seed"};
  reject_unknown(j, allowed, "");

  ScenarioConfig cfg;
  std::string which = "custom";
  if (j.contains("scenario")) which = str_at(j.at("scenario"), "scenario");
  bool is_builtin =
      which == "I" || which == "II" || which == "III" || which == "Full";
  if (is_builtin) {
    if (j.contains("bsses"))
      throw ConfigError("bsses: not allowed together with builtin scenario " +
                        which);
    cfg = builtin_scenario(which, false);
  } else {
    cfg.scenario.id = which;
    if (!j.contains("bsses"))
      throw ConfigError("bsses is required for a custom scenario");
    const json& jb = j.at("bsses");
    if (!jb.is_array() || jb.empty())
      throw ConfigError("bsses: expected a non-empty array");
    for (size_t i = 0; i < jb.size(); ++i)
      cfg.scenario.bsses.push_back(
          parse_bss(jb[i], "bsses[" + std::to_string(i) + "]"));
  }
  if (j.contains("phy")) parse_phy(j.at("phy"), cfg.scenario.phy);
  if (j.contains("randomizers"))
    parse_randomizers(j.at("randomizers"), cfg.randomizers);
  if (j.contains("instances"))
    cfg.instances = int_at(j.at("instances"), "instances");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer())
      throw ConfigError("seed: expected a non-negative integer");
    if (!s.is_number_unsigned() && s.get<long long>() < 0)
      throw ConfigError("seed: expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  require_valid(cfg);
  return cfg;
}

std::vector<std::string> validate(const ScenarioConfig& config) {
  std::vector<std::string> diags;
  if (config.scenario.bsses.empty()) diags.push_back("bsses: must be non-empty");
  try {
    config.scenario.phy.validate();
  } catch (const ConfigError& e) {
    diags.push_back(std::string("phy: ") + e.what());
  }
  std::set<std::string> seen;
  for (size_t i = 0; i < config.scenario.bsses.size(); ++i) {
    const BssSpec& b = config.scenario.bsses[i];
    std::string prefix = "bsses[" + std::to_string(i) + "].";
    b.check([&](const std::string& field, const std::string& msg) {
      diags.push_back(prefix + field + " " + msg);
    });
    if (!b.id.empty() && !seen.insert(b.id).second)
      diags.push_back(prefix + "id duplicates an earlier bss id");
  }
  if (config.instances < 1) diags.push_back("instances: must be >= 1");
  const Randomizers& r = config.randomizers;
  if (r.distance_active &&
      (!(r.distance_min > 0) || r.distance_max < r.distance_min))
    diags.push_back("randomizers.distance_range: need 0 < min <= max");
  if (r.delta_active &&
      (r.delta_min < 1 || r.delta_max < r.delta_min || r.delta_max > 1024))
    diags.push_back("randomizers.delta_range: need 1 <= min <= max <= 1024");
  return diags;
}

Scenario resolved_scenario(const ScenarioConfig& config) {
  Scenario sc = config.scenario;
  if (config.npca_global) {
    for (auto& b : sc.bsses)
      b.npca_enabled = *config.npca_global && b.allocation.unit_count() >= 2;
  }
  return sc;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Scenario instance_scenario(const ScenarioConfig& config, std::uint64_t index) {
  Scenario sc = resolved_scenario(config);
  const Randomizers& r = config.randomizers;
  if (!r.distance_active && !r.delta_active) return sc;
  std::mt19937_64 rng(derive_seed(config.seed, index));
  if (r.distance_active) {
    for (auto& b : sc.bsses) {
      double u = unit_uniform(rng);
      b.distance_m = r.distance_min + (r.distance_max - r.distance_min) * u;
      b.mcs_index.reset();  // the draw decides the MCS
    }
  }
  if (r.delta_active) {
    double u = unit_uniform(rng);
    long long span = r.delta_max - r.delta_min + 1;
    long long d = r.delta_min + static_cast<long long>(u * static_cast<double>(span));
    if (d > r.delta_max) d = r.delta_max;  // u == 1 edge
    for (auto& b : sc.bsses) b.delta = d;
  }
  return sc;
}

bool AggregateReport::ok() const {
  for (const auto& p : points)
    if (!p.errors.empty()) return false;
  return true;
}

AggregateReport monte_carlo(const ScenarioConfig& config, Engine engine,
                            const McOptions& options) {
  require_valid(config);
  AggregateReport report;
  report.scenario = config.scenario.id;
  report.engine = engine == Engine::Ctmc ? "ctmc" : "des";
  report.seed = config.seed;
  report.points.push_back(evaluate_point(config, engine, options));
  return report;
}

AggregateReport sweep(const ScenarioConfig& config, const std::string& parameter,
                      const std::vector<std::string>& values, Engine engine,
                      const McOptions& options) {
  require_valid(config);
  if (values.empty()) throw ConfigError("grid must be non-empty");
  AggregateReport report;
  report.scenario = config.scenario.id;
  report.engine = engine == Engine::Ctmc ? "ctmc" : "des";
  report.seed = config.seed;
  for (const auto& v : values) {
    ScenarioConfig cfg = config;
    if (parameter == "delta") {
      long long d = parse_ll(v, "delta grid value");
      for (auto& b : cfg.scenario.bsses) b.delta = d;
      cfg.randomizers.delta_active = false;
    } else if (parameter == "alpha_d") {
      double a = parse_d(v, "alpha_d grid value");
      int idx = cfg.scenario.index_of("D");
      if (idx < 0)
        throw ConfigError("alpha_d sweep needs a BSS with id D");
      cfg.scenario.bsses[static_cast<size_t>(idx)].alpha = a;
    } else if (parameter == "mcs_pair") {
      size_t colon = v.find(':');
      if (colon == std::string::npos)
        throw ConfigError("mcs_pair grid value: expected first:second, got " +
                          v);
      long long m0 = parse_ll(v.substr(0, colon), "mcs_pair grid value");
      long long m1 = parse_ll(v.substr(colon + 1), "mcs_pair grid value");
      if (cfg.scenario.bsses.size() < 2)
        throw ConfigError("mcs_pair sweep needs at least two BSSs");
      for (size_t k : {size_t{0}, size_t{1}}) {
        cfg.scenario.bsses[k].mcs_index =
            static_cast<int>(k == 0 ? m0 : m1);
        cfg.scenario.bsses[k].distance_m.reset();
      }
    } else {
      throw ConfigError("unknown sweep parameter " + parameter +
                        " (expected delta, alpha_d or mcs_pair)");
    }
    require_valid(cfg);
    GridPoint point = evaluate_point(cfg, engine, options);
    point.grid_param = parameter;
    point.grid_value = v;
    report.points.push_back(std::move(point));
  }
  return report;
}

void write_csv_header(std::ostream& os) {
  os << "scenario,engine,grid_param,grid_value,bss,metric,statistic,value,"
        "seed,version\n";
}

void write_csv_row(const CsvRow& row, std::ostream& os) {
  os << csv_field(row.scenario) << ',' << csv_field(row.engine) << ','
     << csv_field(row.grid_param) << ',' << csv_field(row.grid_value) << ','
     << csv_field(row.bss) << ',' << csv_field(row.metric) << ','
     << csv_field(row.statistic) << ',' << fmt_value(row.value) << ','
     << row.seed << ',' << csv_field(artifact_version()) << '\n';
}

void write_csv(const AggregateReport& report, std::ostream& os) {
  write_csv_header(os);
  CsvRow row;
  row.scenario = report.scenario;
  row.engine = report.engine;
  row.seed = report.seed;
  for (const auto& point : report.points) {
    row.grid_param = point.grid_param;
    row.grid_value = point.grid_value;
    for (const auto& agg : point.bsses) {
      row.bss = agg.bss;
      row.metric = "throughput_mbps";
      const BoxStats& t = agg.throughput_mbps;
      for (auto [name, value] :
           std::initializer_list<std::pair<const char*, double>>{
               {"mean", t.mean},
               {"median", t.median},
               {"q1", t.q1},
               {"q3", t.q3},
               {"whisker_low", t.whisker_low},
               {"whisker_high", t.whisker_high}}) {
        row.statistic = name;
        row.value = value;
        write_csv_row(row, os);
      }
      row.statistic = "outlier";
      for (double o : t.outliers) {
        row.value = o;
        write_csv_row(row, os);
      }
      row.metric = "delay_ms";
      row.statistic = "mean";
      row.value = agg.delay_ms.mean;
      write_csv_row(row, os);
      if (agg.collision_prob) {
        row.metric = "collision_prob";
        row.statistic = "mean";
        row.value = agg.collision_prob->mean;
        write_csv_row(row, os);
      }
    }
  }
}

void write_json(const AggregateReport& report, std::ostream& os) {
  ordered_json j;
  j["scenario"] = report.scenario;
  j["engine"] = report.engine;
  j["seed"] = report.seed;
  j["version"] = artifact_version();
  j["points"] = ordered_json::array();
  for (const auto& point : report.points) {
    ordered_json jp;
    jp["grid_param"] = point.grid_param;
    jp["grid_value"] = point.grid_value;
    jp["bsses"] = ordered_json::array();
    for (const auto& agg : point.bsses) {
      ordered_json ja;
      ja["bss"] = agg.bss;
      ja["throughput_mbps"] = box_json(agg.throughput_mbps);
      ja["delay_ms"] = box_json(agg.delay_ms);
      if (agg.collision_prob)
        ja["collision_prob"] = box_json(*agg.collision_prob);
      jp["bsses"].push_back(std::move(ja));
    }
    jp["errors"] = point.errors;
    j["points"].push_back(std::move(jp));
  }
  os << j.dump(2) << '\n';
}

}  // namespace npca
