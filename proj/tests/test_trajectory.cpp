#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "npca/ctmc.hpp"
#include "npca/harness.hpp"
#include "npca/trajectory.hpp"

using namespace npca;
using doctest::Approx;

namespace {

struct Built {
  ChainSkeleton chain;
  GeneratorMatrix gen;
  StationaryDistribution dist;
};

Built build(const Scenario& sc) {
  Built b;
  b.chain = enumerate_states(sc);
  b.gen = build_generator(b.chain);
  b.dist = stationary(b.gen);
  return b;
}

// Model time that yields roughly `events` jumps: the mean event rate is the
// pi-weighted exit rate.
double duration_for_events(const Built& b, double events) {
  double rate = 0.0;
  for (int i = 0; i < b.gen.q.rows(); ++i)
    rate += b.dist.pi(i) * -b.gen.q(i, i);
  return events / rate;
}

}  // namespace

TEST_CASE("occupancy tracks the stationary distribution") {
  Built b = build(builtin_scenario("I", false).scenario);
  TrajectorySimulator sim(b.chain, b.gen);
  REQUIRE(sim.state_count() == 3);

  double duration = duration_for_events(b, 1e6);
  std::vector<double> occ = sim.occupancy(duration, 42);
  REQUIRE(static_cast<int>(occ.size()) == 3);
  double total = 0.0;
  for (double o : occ) {
    CHECK(o >= 0.0);
    total += o;
  }
  CHECK(total == Approx(1.0).epsilon(1e-9));

  double tv = 0.0;
  for (int i = 0; i < 3; ++i) tv += std::abs(occ[i] - b.dist.pi(i));
  tv *= 0.5;
  CHECK(tv < 1e-2);
}

TEST_CASE("event stream is reproducible per seed") {
  Built b = build(builtin_scenario("I", true).scenario);
  TrajectorySimulator sim(b.chain, b.gen);

  std::ostringstream a, c, d;
  sim.dump_events(0.5, 7, a);
  sim.dump_events(0.5, 7, c);
  sim.dump_events(0.5, 8, d);
  CHECK(a.str() == c.str());
  CHECK(a.str() != d.str());
  CHECK(a.str().find('\n') != std::string::npos);
}

TEST_CASE("sampled access delay approaches the closed form") {
  Scenario sc = builtin_scenario("I", false).scenario;
  Built b = build(sc);
  TrajectorySimulator sim(b.chain, b.gen);
  std::vector<double> closed = access_delay_closed_form(b.dist, b.chain);

  DelayReport rep = sim.access_delay(200.0, 11);
  REQUIRE(rep.per_bss.size() == 2);
  for (std::size_t i = 0; i < rep.per_bss.size(); ++i) {
    CHECK(rep.per_bss[i].count > 1000);
    CHECK(rep.per_bss[i].mean == Approx(closed[i]).epsilon(0.02));
    CHECK(rep.per_bss[i].stddev > 0.0);
  }

  DelayReport again = sim.access_delay(200.0, 11);
  CHECK(again.per_bss[0].mean == rep.per_bss[0].mean);
  CHECK(again.per_bss[0].count == rep.per_bss[0].count);
}

TEST_CASE("secondary access shortens the wide station's access gaps") {
  Built leg = build(builtin_scenario("I", false).scenario);
  Built np = build(builtin_scenario("I", true).scenario);
  TrajectorySimulator sim_leg(leg.chain, leg.gen);
  TrajectorySimulator sim_np(np.chain, np.gen);

  DelayReport d_leg = sim_leg.access_delay(100.0, 3);
  DelayReport d_np = sim_np.access_delay(100.0, 3);
  CHECK(d_np.per_bss[0].mean < d_leg.per_bss[0].mean);

  std::vector<double> closed = access_delay_closed_form(np.dist, np.chain);
  CHECK(d_np.per_bss[0].mean == Approx(closed[0]).epsilon(0.03));
}

TEST_CASE("walk respects the duration bound") {
  Built b = build(builtin_scenario("II", true).scenario);
  TrajectorySimulator sim(b.chain, b.gen);
  double last = -1.0;
  sim.walk(2.0, 5, [&](const TrajectoryEvent& ev) {
    CHECK(ev.time > last);
    last = ev.time;
    CHECK(ev.time < 2.0);
    CHECK(ev.from_state >= 0);
    CHECK(ev.to_state >= 0);
  });
  CHECK(last > 0.0);
}
