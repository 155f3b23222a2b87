#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "npca/scenario.hpp"

namespace npca {

struct DesPerBss {
  double throughput_bps = 0.0;
  double mean_delay_s = 0.0;    // scheduled to Block-ACK, collisions included
  double delay_stddev_s = 0.0;
  long long delay_samples = 0;
  double collision_prob = 0.0;  // collided attempts / attempts
  long long attempts = 0;
  long long collisions = 0;
  long long successes = 0;
  long long npca_txops = 0;
};

struct DesMetrics {
  std::vector<DesPerBss> per_bss;  // indexed like Scenario::bsses
  double duration = 0.0;
  // Invariants asserted during the run; counters prove they were exercised.
  long long exclusivity_checks = 0;
  long long npca_deadline_checks = 0;
};

struct DesOptions {
  double duration = 10.0;
  std::uint64_t seed = 1;
  std::ostream* trace = nullptr;  // one line per access/collision/switch
};

// Slot-accurate saturated-downlink simulation: binary exponential backoff,
// RTS-level collisions, per-MPDU error rate, widest-idle channel bonding and
// NPCA mode switching with a single backoff instance per BSS. All timing runs
// on an integer picosecond clock, so equal-slot fires collide exactly.
DesMetrics run_des(const Scenario& scenario, const DesOptions& options);

// n identical saturated BSSs sharing one 80 MHz channel; returns the mean
// collided-attempt fraction.
double collision_probability_check(int n_contenders, double duration,
                                   std::uint64_t seed);

}  // namespace npca
