#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "npca/band.hpp"
#include "npca/phy.hpp"

namespace npca {

struct BssSpec {
  std::string id;
  BandSet allocation;
  int primary_unit = 0;
  bool npca_enabled = false;
  int cw_min = 16;    // counters drawn from [0, cw-1]
  int cw_max = 1024;
  double alpha = 1.0;
  long long delta = 128;
  std::optional<int> mcs_index;      // wins over distance_m when both set
  std::optional<double> distance_m;
  int n_ss = 2;
  long long payload_bits = 11200;  // L, 1400 bytes

  McsProfile mcs() const;
  // The allocation half holding primary_unit; the whole allocation for a
  // single-unit one.
  BandSet primary_half() const;
  // The other half; contention moves here in NPCA mode. Empty for
  // single-unit allocations.
  BandSet npca_band() const;

  void validate() const;  // throws ConfigError naming the offending field
  // Reports every violated field as (field, message); validate() throws on
  // the first one. Lets callers build dotted paths like bsses[0].delta.
  void check(const std::function<void(const std::string& field,
                                      const std::string& message)>& fail) const;
};

struct Scenario {
  std::string id = "custom";  // "I", "II", "III", "Full" or "custom"
  std::vector<BssSpec> bsses;
  PhyParams phy;

  void validate() const;
  int index_of(const std::string& bss_id) const;  // -1 when absent
};

}  // namespace npca
