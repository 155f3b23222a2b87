#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "npca/scenario.hpp"
#include "npca/stats.hpp"

namespace npca {

// Randomization for Monte-Carlo instances. A range is drawn only while its
// flag is on; distances are per BSS, the A-MPDU cap is one draw shared by
// every BSS of the instance.
struct Randomizers {
  bool distance_active = false;
  double distance_min = 1.0;
  double distance_max = 17.0;
  bool delta_active = false;
  long long delta_min = 1;
  long long delta_max = 1024;
};

struct ScenarioConfig {
  Scenario scenario;
  Randomizers randomizers;
  long long instances = 1;
  std::uint64_t seed = 1;
  // When set, forces NPCA on every BSS wide enough to use it (or off for
  // all); unset keeps the per-BSS flags.
  std::optional<bool> npca_global;
};

struct BuiltinOptions {
  double alpha_d = 1.0;                    // activity of BSS D
  std::optional<long long> delta;          // A-MPDU cap for every BSS
  std::map<std::string, int> mcs_override; // by BSS id; pins MCS, drops distance
};

// The two-channel topology: A 160 MHz on units 0-7 with primary 0, B 80 MHz
// on 0-3, C 160 MHz with primary 4, D 80 MHz on 4-7. "I" = {A,B},
// "II" = {A,B,D}, "III" and "Full" = {A,B,C,D}. Distances default to
// A 1.5 m, B 17 m, C and D 5 m; the control-overhead calibration is applied.
// npca enables NPCA on the 160 MHz BSSs.
ScenarioConfig builtin_scenario(const std::string& which, bool npca,
                                const BuiltinOptions& options = {});

// JSON file with top-level keys scenario, bsses, phy, randomizers, instances,
// seed. "scenario" may name a builtin ("I", "II", "III", "Full"), in which
// case bsses must be absent; anything else labels the custom BSS list.
// Unknown keys anywhere are rejected with their path.
ScenarioConfig load_scenario(const std::string& path);

// Every violated invariant as "path: problem"; empty means valid.
std::vector<std::string> validate(const ScenarioConfig& config);

// Applies npca_global and returns the concrete scenario.
Scenario resolved_scenario(const ScenarioConfig& config);

// splitmix64 finalizer over (base, index): instance seeds that differ in
// every bit even for adjacent indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// The scenario evaluated by instance `index`: randomized distances erase any
// pinned MCS so the draw takes effect.
Scenario instance_scenario(const ScenarioConfig& config, std::uint64_t index);

enum class Engine { Ctmc, Des };

struct McOptions {
  double duration = 10.0;  // DES seconds per instance; CTMC ignores it
};

struct BssAggregate {
  std::string bss;
  BoxStats throughput_mbps;
  BoxStats delay_ms;
  std::optional<BoxStats> collision_prob;  // DES engine only
};

struct GridPoint {
  std::string grid_param = "none";
  std::string grid_value;
  std::vector<BssAggregate> bsses;
  std::vector<std::string> errors;  // "instance 3: <reason>"
};

struct AggregateReport {
  std::string scenario;
  std::string engine;
  std::uint64_t seed = 0;
  std::vector<GridPoint> points;

  bool ok() const;  // no per-instance errors anywhere
};

// instances-many engine evaluations with derived seeds, aggregated per BSS.
// Failing instances are recorded and skipped; the report is still produced
// as long as at least one instance per grid point succeeds.
AggregateReport monte_carlo(const ScenarioConfig& config, Engine engine,
                            const McOptions& options = {});

// One monte_carlo per grid value. parameter is "delta" (A-MPDU cap, disables
// the delta randomizer), "alpha_d" (activity of BSS D) or "mcs_pair"
// ("11:1" pins the first two BSSs' MCS and their distances).
AggregateReport sweep(const ScenarioConfig& config, const std::string& parameter,
                      const std::vector<std::string>& values, Engine engine,
                      const McOptions& options = {});

// Long format, one statistic per row:
// scenario,engine,grid_param,grid_value,bss,metric,statistic,value,seed,version
void write_csv(const AggregateReport& report, std::ostream& os);
void write_json(const AggregateReport& report, std::ostream& os);

// Row-level access to the same format, for outputs that are not aggregate
// reports (trajectory delays, table reproduction). The version column is
// filled in by write_csv_row.
struct CsvRow {
  std::string scenario;
  std::string engine;
  std::string grid_param = "none";
  std::string grid_value;
  std::string bss;
  std::string metric;
  std::string statistic;
  double value = 0.0;
  std::uint64_t seed = 0;
};

void write_csv_header(std::ostream& os);
void write_csv_row(const CsvRow& row, std::ostream& os);

}  // namespace npca
