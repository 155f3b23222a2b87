#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "npca/ctmc.hpp"
#include "npca/errors.hpp"

namespace npca {

struct TrajectoryEvent {
  double time = 0.0;
  int from_state = 0;
  int to_state = 0;
  Transition::Kind kind = Transition::Kind::Access;
  int bss = -1;
};

struct DelayStats {
  double mean = 0.0;
  double stddev = 0.0;
  long long count = 0;
};

struct DelayReport {
  std::vector<DelayStats> per_bss;  // indexed like Scenario::bsses
  double duration = 0.0;
};

// Jump-chain walk of the generator: exponential sojourns, next state picked
// proportionally to the outgoing rates. Deterministic for a given seed; the
// samplers are hand-rolled on mt19937_64 so streams match across platforms.
class TrajectorySimulator {
public:
  TrajectorySimulator(const ChainSkeleton& skeleton, const GeneratorMatrix& gen);

  // Calls sink(event) for every jump until `duration` model seconds passed.
  template <class Sink>
  void walk(double duration, std::uint64_t seed, Sink&& sink) const;

  // Fraction of model time spent in each state.
  std::vector<double> occupancy(double duration, std::uint64_t seed) const;

  // Start-to-start gaps between events that add a transmission for a BSS.
  // Warm-up: samples begin at the first visit to state 0 past 1% of the run.
  DelayReport access_delay(double duration, std::uint64_t seed) const;

  // One line per event: time, from, to, kind, bss.
  void dump_events(double duration, std::uint64_t seed, std::ostream& os) const;

  int state_count() const { return static_cast<int>(exit_rate_.size()); }

private:
  struct Choice {
    int to;
    double cum;  // cumulative rate, last entry == exit rate of the state
    Transition::Kind kind;
    int bss;
  };
  std::vector<double> exit_rate_;
  std::vector<std::vector<Choice>> choices_;
  int n_bss_;
};

namespace detail {

inline double unit_uniform(std::uint64_t bits) {
  // (0,1]: keeps -log finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

template <class Sink>
void TrajectorySimulator::walk(double duration, std::uint64_t seed,
                               Sink&& sink) const {
  std::mt19937_64 rng(seed);
  int state = 0;
  double t = 0.0;
  while (true) {
    double rate = exit_rate_[state];
    if (rate <= 0.0) throw EngineError("absorbing state in trajectory walk");
    t += -std::log(detail::unit_uniform(rng())) / rate;
    if (t >= duration) return;
    const auto& out = choices_[state];
    double u = detail::unit_uniform(rng()) * rate;
    size_t pick = 0;
    while (pick + 1 < out.size() && u > out[pick].cum) ++pick;
    TrajectoryEvent ev{t, state, out[pick].to, out[pick].kind, out[pick].bss};
    state = out[pick].to;
    sink(ev);
  }
}

}  // namespace npca
