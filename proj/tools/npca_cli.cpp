#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npca/ctmc.hpp"
#include "npca/des.hpp"
#include "npca/errors.hpp"
#include "npca/harness.hpp"
#include "npca/trajectory.hpp"
#include "npca/version.hpp"

namespace {

using namespace npca;

struct CommonArgs {
  std::string scenario = "builtin:I";
  std::string npca;  // "", "on", "off"
  std::string engine = "ctmc";
  std::uint64_t seed = 1;
  bool seed_set = false;
  long long instances = 0;  // 0 = take the config's value
  double duration = 10.0;
  bool duration_set = false;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_engine) {
  cmd->add_option("--scenario", a.scenario,
                  "Config file path, or builtin:I|II|III|Full")
      ->capture_default_str();
  cmd->add_option("--npca", a.npca, "Force NPCA on or off for every BSS")
      ->check(CLI::IsMember({"on", "off"}));
  if (with_engine)
    cmd->add_option("--engine", a.engine, "Evaluation engine")
        ->check(CLI::IsMember({"ctmc", "des"}))
        ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Base seed for all derived streams")
      ->capture_default_str();
  cmd->add_option("--instances", a.instances,
                  "Monte-Carlo instances (overrides the config)");
  cmd->add_option("--duration", a.duration,
                  "Simulated seconds per run (simulate, delay)")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Output file (default: stdout)");
  cmd->add_option("--format", a.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

ScenarioConfig load_from_args(const CLI::App* cmd, const CommonArgs& a) {
  ScenarioConfig cfg;
  if (a.scenario.rfind("builtin:", 0) == 0) {
    cfg = builtin_scenario(a.scenario.substr(8), false);
  } else {
    cfg = load_scenario(a.scenario);
  }
  if (!a.npca.empty()) cfg.npca_global = a.npca == "on";
  if (cmd->count("--seed") > 0) cfg.seed = a.seed;
  if (cmd->count("--instances") > 0) {
    if (a.instances < 1) throw ConfigError("instances: must be >= 1");
    cfg.instances = a.instances;
  }
  return cfg;
}

// Stream that is either stdout or an owned file.
struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw ConfigError("cannot write " + path);
    os = &file;
  }
};

int finish_report(const AggregateReport& report, const CommonArgs& a) {
  Output out(a.out);
  if (a.format == "json")
    write_json(report, *out.os);
  else
    write_csv(report, *out.os);
  if (!report.ok()) {
    for (const auto& p : report.points)
      for (const auto& e : p.errors) std::cerr << "engine failure: " << e << "\n";
    return 2;
  }
  return 0;
}

int run_analyze(const CLI::App* cmd, const CommonArgs& a) {
  ScenarioConfig cfg = load_from_args(cmd, a);
  return finish_report(monte_carlo(cfg, Engine::Ctmc), a);
}

int run_simulate(const CLI::App* cmd, const CommonArgs& a) {
  ScenarioConfig cfg = load_from_args(cmd, a);
  McOptions opts;
  opts.duration = a.duration;
  return finish_report(monte_carlo(cfg, Engine::Des, opts), a);
}

int run_sweep(const CLI::App* cmd, const CommonArgs& a,
              const std::string& grid) {
  ScenarioConfig cfg = load_from_args(cmd, a);
  size_t eq = grid.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--grid expects key=v1,v2,... (keys: delta, alpha_d, "
                      "mcs_pair)");
  std::string key = grid.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(grid.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) values.push_back(item);
  McOptions opts;
  opts.duration = a.duration;
  Engine engine = a.engine == "des" ? Engine::Des : Engine::Ctmc;
  return finish_report(sweep(cfg, key, values, engine, opts), a);
}

int run_delay(const CLI::App* cmd, const CommonArgs& a) {
  ScenarioConfig cfg = load_from_args(cmd, a);
  std::vector<std::string> diags = validate(cfg);
  if (!diags.empty()) {
    std::string joined;
    for (const auto& d : diags) joined += (joined.empty() ? "" : "\n") + d;
    throw ConfigError(joined);
  }
  Scenario sc = resolved_scenario(cfg);
  ChainSkeleton chain = enumerate_states(sc);
  GeneratorMatrix gen = build_generator(chain);
  StationaryDistribution pi = stationary(gen);
  std::vector<double> closed = access_delay_closed_form(pi, chain);
  TrajectorySimulator sim(chain, gen);
  DelayReport rep = sim.access_delay(a.duration, derive_seed(cfg.seed, 0));

  Output out(a.out);
  if (a.format == "json") {
    *out.os << "{\n  \"scenario\": \"" << sc.id << "\",\n  \"engine\": "
            << "\"trajectory\",\n  \"seed\": " << cfg.seed
            << ",\n  \"version\": \"" << artifact_version()
            << "\",\n  \"bsses\": [\n";
    for (size_t b = 0; b < sc.bsses.size(); ++b) {
      const DelayStats& d = rep.per_bss[b];
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "    {\"bss\": \"%s\", \"mean_ms\": %.10g, \"stddev_ms\": "
                    "%.10g, \"count\": %lld, \"closed_form_ms\": %.10g}%s\n",
                    sc.bsses[b].id.c_str(), d.mean * 1e3, d.stddev * 1e3,
                    d.count, closed[b] * 1e3,
                    b + 1 < sc.bsses.size() ? "," : "");
      *out.os << buf;
    }
    *out.os << "  ]\n}\n";
    return 0;
  }
  write_csv_header(*out.os);
  CsvRow row;
  row.scenario = sc.id;
  row.engine = "trajectory";
  row.seed = cfg.seed;
  for (size_t b = 0; b < sc.bsses.size(); ++b) {
    row.bss = sc.bsses[b].id;
    row.metric = "delay_ms";
    row.statistic = "mean";
    row.value = rep.per_bss[b].mean * 1e3;
    write_csv_row(row, *out.os);
    row.statistic = "stddev";
    row.value = rep.per_bss[b].stddev * 1e3;
    write_csv_row(row, *out.os);
    row.statistic = "count";
    row.value = static_cast<double>(rep.per_bss[b].count);
    write_csv_row(row, *out.os);
    row.statistic = "closed_form";
    row.value = closed[b] * 1e3;
    write_csv_row(row, *out.os);
  }
  return 0;
}

struct RunStats {
  double mean = 0.0, stddev = 0.0;
};

RunStats run_stats(const std::vector<double>& xs) {
  RunStats s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double m2 = 0;
    for (double x : xs) m2 += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(m2 / static_cast<double>(xs.size() - 1));
  }
  return s;
}

int run_reproduce_tables(const CLI::App* cmd, const CommonArgs& a) {
  if (a.format == "json")
    throw ConfigError("reproduce-tables emits csv only");
  std::uint64_t seed = cmd->count("--seed") > 0 ? a.seed : 1;
  double duration = a.duration_set ? a.duration : 50.0;
  const int kRuns = 5;

  Output out(a.out);
  write_csv_header(*out.os);
  const char* scens[] = {"I", "II", "III"};
  for (int si = 0; si < 3; ++si) {
    for (int mi = 0; mi < 2; ++mi) {
      bool npca = mi == 1;
      ScenarioConfig cfg = builtin_scenario(scens[si], npca);
      Scenario sc = resolved_scenario(cfg);
      ChainSkeleton chain = enumerate_states(sc);
      GeneratorMatrix gen = build_generator(chain);
      StationaryDistribution pi = stationary(gen);
      std::vector<double> gamma = throughput(pi, chain);
      std::vector<double> delays = access_delay_closed_form(pi, chain);

      size_t n_bss = sc.bsses.size();
      std::vector<std::vector<double>> thr(n_bss), del(n_bss), col(n_bss);
      for (int r = 0; r < kRuns; ++r) {
        DesOptions o;
        o.duration = duration;
        o.seed = derive_seed(seed, static_cast<std::uint64_t>(
                                       (si * 2 + mi) * kRuns + r));
        DesMetrics m = run_des(sc, o);
        for (size_t b = 0; b < n_bss; ++b) {
          thr[b].push_back(m.per_bss[b].throughput_bps / 1e6);
          del[b].push_back(m.per_bss[b].mean_delay_s * 1e3);
          col[b].push_back(m.per_bss[b].collision_prob);
        }
      }

      CsvRow row;
      row.scenario = scens[si];
      row.grid_param = "npca";
      row.grid_value = npca ? "on" : "off";
      row.seed = seed;
      for (size_t b = 0; b < n_bss; ++b) {
        row.bss = sc.bsses[b].id;
        row.engine = "ctmc";
        row.metric = "throughput_mbps";
        row.statistic = "value";
        row.value = gamma[b] / 1e6;
        write_csv_row(row, *out.os);
        row.metric = "delay_ms";
        row.value = delays[b] * 1e3;
        write_csv_row(row, *out.os);

        RunStats t = run_stats(thr[b]);
        RunStats d = run_stats(del[b]);
        RunStats c = run_stats(col[b]);
        row.engine = "des";
        row.metric = "throughput_mbps";
        row.statistic = "mean";
        row.value = t.mean;
        write_csv_row(row, *out.os);
        row.statistic = "stddev";
        row.value = t.stddev;
        write_csv_row(row, *out.os);
        row.metric = "delay_ms";
        row.statistic = "mean";
        row.value = d.mean;
        write_csv_row(row, *out.os);
        row.metric = "collision_prob";
        row.statistic = "mean";
        row.value = c.mean;
        write_csv_row(row, *out.os);

        char line[256];
        std::snprintf(line, sizeof line,
                      "%-3s npca=%-3s %s: ctmc %8.1f Mbps %6.2f ms | des "
                      "%8.1f Mbps (sd %.1f) %6.2f ms coll %.4f\n",
                      scens[si], npca ? "on" : "off", sc.bsses[b].id.c_str(),
                      gamma[b] / 1e6, delays[b] * 1e3, t.mean, t.stddev,
                      d.mean, c.mean);
        std::cerr << line;
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Throughput and channel-access delay of overlapping Wi-Fi BSSs with "
      "dynamic bonding and non-primary channel access"};
  app.require_subcommand(1);

  CommonArgs analyze_args, delay_args, simulate_args, sweep_args, tables_args;
  std::string grid;

  CLI::App* analyze =
      app.add_subcommand("analyze", "Stationary-chain throughput and delay");
  add_common(analyze, analyze_args, false);

  CLI::App* delay =
      app.add_subcommand("delay", "Jump-chain trajectory access delays");
  add_common(delay, delay_args, false);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Slot-accurate event simulation");
  add_common(simulate, simulate_args, false);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Grid of Monte-Carlo evaluations");
  add_common(sweep_cmd, sweep_args, true);
  sweep_cmd->add_option("--grid", grid, "key=v1,v2,... (delta, alpha_d, mcs_pair)")
      ->required();

  CLI::App* tables = app.add_subcommand(
      "reproduce-tables",
      "Builtin scenarios I-III, NPCA off and on, analytic vs simulated");
  add_common(tables, tables_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (analyze->parsed()) return run_analyze(analyze, analyze_args);
    if (delay->parsed()) {
      delay_args.duration_set = delay->count("--duration") > 0;
      return run_delay(delay, delay_args);
    }
    if (simulate->parsed()) return run_simulate(simulate, simulate_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_cmd, sweep_args, grid);
    if (tables->parsed()) {
      tables_args.duration_set = tables->count("--duration") > 0;
      return run_reproduce_tables(tables, tables_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EngineError& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
