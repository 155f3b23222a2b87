#include "npca/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace npca {

TrajectorySimulator::TrajectorySimulator(const ChainSkeleton& skeleton,
                                         const GeneratorMatrix& gen) {
  int n = static_cast<int>(skeleton.states.size());
  n_bss_ = static_cast<int>(skeleton.scenario.bsses.size());
  exit_rate_.assign(n, 0.0);
  choices_.assign(n, {});
  for (int i = 0; i < n; ++i) exit_rate_[i] = -gen.q(i, i);
  // Transitions in skeleton order; parallel edges stay separate, which leaves
  // the jump distribution unchanged.
  std::vector<double> run(n, 0.0);
  for (const auto& t : skeleton.transitions) {
    run[t.from] += t.rate;
    choices_[t.from].push_back({t.to, run[t.from], t.kind, t.bss});
  }
}

std::vector<double> TrajectorySimulator::occupancy(double duration,
                                                   std::uint64_t seed) const {
  std::vector<double> time_in(exit_rate_.size(), 0.0);
  double last_t = 0.0;
  int last_state = 0;
  walk(duration, seed, [&](const TrajectoryEvent& ev) {
    time_in[ev.from_state] += ev.time - last_t;
    last_t = ev.time;
    last_state = ev.to_state;
  });
  time_in[last_state] += duration - last_t;
  for (double& v : time_in) v /= duration;
  return time_in;
}

DelayReport TrajectorySimulator::access_delay(double duration,
                                              std::uint64_t seed) const {
  struct Acc {
    double last = -1.0;
    long long count = 0;
    double mean = 0.0, m2 = 0.0;
  };
  std::vector<Acc> acc(n_bss_);
  bool warmed = false;
  double warm_floor = 0.01 * duration;
  walk(duration, seed, [&](const TrajectoryEvent& ev) {
    if (!warmed) {
      if (ev.to_state == 0 && ev.time >= warm_floor) warmed = true;
      return;
    }
    if (ev.kind != Transition::Kind::Access &&
        ev.kind != Transition::Kind::NpcaAccess)
      return;
    Acc& a = acc[ev.bss];
    if (a.last >= 0.0) {
      double gap = ev.time - a.last;
      ++a.count;
      double d = gap - a.mean;
      a.mean += d / static_cast<double>(a.count);
      a.m2 += d * (gap - a.mean);
    }
    a.last = ev.time;
  });
  DelayReport rep;
  rep.duration = duration;
  for (const Acc& a : acc) {
    DelayStats s;
    s.count = a.count;
    s.mean = a.count > 0 ? a.mean : 0.0;
    s.stddev = a.count > 1 ? std::sqrt(a.m2 / static_cast<double>(a.count - 1)) : 0.0;
    rep.per_bss.push_back(s);
  }
  return rep;
}

void TrajectorySimulator::dump_events(double duration, std::uint64_t seed,
                                      std::ostream& os) const {
  auto kind_name = [](Transition::Kind k) {
    switch (k) {
      case Transition::Kind::Access: return "access";
      case Transition::Kind::NpcaAccess: return "npca_access";
      case Transition::Kind::Completion: return "completion";
      case Transition::Kind::NpcaCompletion: return "npca_completion";
    }
    return "?";
  };
  char line[128];
  walk(duration, seed, [&](const TrajectoryEvent& ev) {
    std::snprintf(line, sizeof line, "%.9f\t%d\t%d\t%s\t%d\n", ev.time,
                  ev.from_state, ev.to_state, kind_name(ev.kind), ev.bss);
    os << line;
  });
}

}  // namespace npca
