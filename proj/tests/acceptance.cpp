// End-to-end acceptance gates: every check prints one PASS/FAIL line and the
// process exits with the number of failed lines. Reference targets are the
// published table and figure values this artifact is validated against.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <queue>
#include <string>
#include <vector>

#include "npca/ctmc.hpp"
#include "npca/des.hpp"
#include "npca/errors.hpp"
#include "npca/harness.hpp"
#include "npca/phy.hpp"
#include "npca/trajectory.hpp"

using namespace npca;

namespace {

int g_failures = 0;

void report(const char* label, bool ok, const std::string& detail) {
  std::printf("%s  %-5s %s\n", ok ? "PASS" : "FAIL", label, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

bool within(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::abs(want);
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Eval {
  ChainSkeleton chain;
  GeneratorMatrix gen;
  StationaryDistribution dist;
  std::vector<double> thr;    // Mbps
  std::vector<double> delay;  // ms
  double seconds = 0.0;
};

Eval eval_chain(const Scenario& sc) {
  Eval e;
  auto t0 = std::chrono::steady_clock::now();
  e.chain = enumerate_states(sc);
  e.gen = build_generator(e.chain);
  e.dist = stationary(e.gen);
  for (double v : throughput(e.dist, e.chain)) e.thr.push_back(v / 1e6);
  for (double v : access_delay_closed_form(e.dist, e.chain))
    e.delay.push_back(v * 1e3);
  e.seconds = seconds_since(t0);
  return e;
}

struct DesTable {
  std::vector<double> thr;   // Mbps, mean of the runs
  std::vector<double> coll;  // mean collision fraction
};

// Five 50 s runs with spread seeds, matching the table-reproduction command.
DesTable des_means(const Scenario& sc, int scenario_index, int mode_index) {
  DesTable t;
  t.thr.assign(sc.bsses.size(), 0.0);
  t.coll.assign(sc.bsses.size(), 0.0);
  const int runs = 5;
  for (int r = 0; r < runs; ++r) {
    DesOptions o;
    o.duration = 50.0;
    o.seed = derive_seed(1, static_cast<std::uint64_t>(
                                (scenario_index * 2 + mode_index) * runs + r));
    DesMetrics m = run_des(sc, o);
    for (std::size_t b = 0; b < m.per_bss.size(); ++b) {
      t.thr[b] += m.per_bss[b].throughput_bps / 1e6 / runs;
      t.coll[b] += m.per_bss[b].collision_prob / runs;
    }
  }
  return t;
}

std::string run_cli(const std::string& cli, const std::string& args) {
  std::string cmd = cli + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {};
  std::string out;
  char buf[1 << 16];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  pclose(p);
  return out;
}

const char* const kScenames[3] = {"I", "II", "III"};

void criterion_1() {
  PhyParams cal;
  cal.ctrl_overhead_override = 274e-6;
  PhyParams computed;
  auto limit = [](const PhyParams& p, int width, int mcs) {
    return max_packets_within(p, p.t_max, 11200, mcs_profile(mcs),
                              width_profile(width), 2, 1024);
  };
  long long c[3] = {limit(cal, 160, 11), limit(cal, 80, 11), limit(cal, 80, 1)};
  long long f[3] = {limit(computed, 160, 11), limit(computed, 80, 11),
                    limit(computed, 80, 1)};
  const long long want[3] = {968, 484, 29};
  bool exact = true, close = true;
  for (int i = 0; i < 3; ++i) {
    exact = exact && c[i] == want[i];
    close = close && within(static_cast<double>(f[i]),
                            static_cast<double>(want[i]), 0.03);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "aggregation limits: calibrated %lld/%lld/%lld, computed "
                "%lld/%lld/%lld vs 968/484/29",
                c[0], c[1], c[2], f[0], f[1], f[2]);
  report("1", exact && close, buf);
}

struct RefRow {
  const char* bss;
  double thr;
  double delay;
};

std::vector<Eval> criterion_2() {
  static const std::vector<std::vector<RefRow>> ref = {
      {{"A", 213.9, 6.05}, {"B", 48.5, 5.98}},
      {{"A", 194.9, 6.65}, {"B", 44.1, 6.55}, {"D", 475.0, 2.70}},
      {{"A", 193.6, 6.68},
       {"B", 43.8, 6.72},
       {"C", 241.9, 5.39},
       {"D", 241.9, 5.41}},
  };
  std::vector<Eval> evals;
  bool ok = true;
  double worst_thr = 0.0, worst_delay = 0.0, slowest = 0.0;
  for (int s = 0; s < 3; ++s) {
    evals.push_back(eval_chain(builtin_scenario(kScenames[s], false).scenario));
    const Eval& e = evals.back();
    slowest = std::max(slowest, e.seconds);
    for (std::size_t b = 0; b < ref[s].size(); ++b) {
      worst_thr = std::max(worst_thr, rel_err(e.thr[b], ref[s][b].thr));
      worst_delay = std::max(worst_delay, rel_err(e.delay[b], ref[s][b].delay));
      ok = ok && within(e.thr[b], ref[s][b].thr, 0.05) &&
           within(e.delay[b], ref[s][b].delay, 0.10);
    }
  }
  ok = ok && slowest < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "analytic legacy tables: max throughput err %.1f%% (<=5), max "
                "delay err %.1f%% (<=10), slowest solve %.3f s (<1)",
                100 * worst_thr, 100 * worst_delay, slowest);
  report("2", ok, buf);
  return evals;
}

void criterion_3() {
  Eval one = eval_chain(builtin_scenario("I", true).scenario);
  Eval two = eval_chain(builtin_scenario("II", true).scenario);
  Eval three = eval_chain(builtin_scenario("III", true).scenario);
  bool ok = within(one.thr[0], 850.7, 0.10) &&
            within(one.delay[0], 1.23, 0.15) && within(one.thr[1], 48.5, 0.05);
  ok = ok && within(two.thr[0], 375.4, 0.10) && within(two.thr[2], 360.7, 0.10);
  const double ref3[4] = {277.7, 39.7, 245.0, 212.4};
  double worst3 = 0.0;
  for (int b = 0; b < 4; ++b) {
    worst3 = std::max(worst3, rel_err(three.thr[b], ref3[b]));
    ok = ok && within(three.thr[b], ref3[b], 0.10);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "analytic secondary-access tables: I A=%.1f (850.7) delay "
                "%.2f ms (1.23) B=%.1f (48.5); II A=%.1f (375.4) D=%.1f "
                "(360.7); III worst err %.1f%% (<=10)",
                one.thr[0], one.delay[0], one.thr[1], two.thr[0], two.thr[2],
                100 * worst3);
  report("3", ok, buf);
}

std::vector<DesTable> criterion_4() {
  static const std::vector<std::vector<double>> sim_legacy = {
      {211.6, 48.12}, {193.3, 43.8, 473.5}, {191.9, 43.5, 238.9, 240.4}};
  static const std::vector<std::vector<double>> sim_npca = {
      {768.0, 50.22}, {369.4, 45.37, 338.3}, {268.7, 39.53, 228.1, 210.1}};

  std::vector<DesTable> legacy_tables;
  bool ok = true;
  double worst_leg = 0.0, worst_np = 0.0;
  double coll_one = 0.0, coll_two_d = 0.0;
  for (int s = 0; s < 3; ++s) {
    Scenario leg = builtin_scenario(kScenames[s], false).scenario;
    Scenario np = builtin_scenario(kScenames[s], true).scenario;
    DesTable tl = des_means(leg, s, 0);
    DesTable tn = des_means(np, s, 1);
    legacy_tables.push_back(tl);
    for (std::size_t b = 0; b < sim_legacy[s].size(); ++b) {
      worst_leg = std::max(worst_leg, rel_err(tl.thr[b], sim_legacy[s][b]));
      worst_np = std::max(worst_np, rel_err(tn.thr[b], sim_npca[s][b]));
      ok = ok && within(tl.thr[b], sim_legacy[s][b], 0.05) &&
           within(tn.thr[b], sim_npca[s][b], 0.10);
    }
    if (s == 0) coll_one = (tl.coll[0] + tl.coll[1]) / 2.0;
    if (s == 1) coll_two_d = tl.coll[2];
  }
  bool coll_ok =
      std::abs(coll_one - 0.108) <= 0.015 && coll_two_d < 0.01;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "simulated tables: worst legacy err %.1f%% (<=5), worst "
                "secondary-access err %.1f%% (<=10), collision I=%.3f "
                "(0.108+-0.015), II D=%.4f (<0.01)",
                100 * worst_leg, 100 * worst_np, coll_one, coll_two_d);
  report("4", ok && coll_ok, buf);
  return legacy_tables;
}

void criterion_5(const std::vector<Eval>& ctmc_legacy,
                 const std::vector<DesTable>& des_legacy) {
  bool ok = true;
  double worst = 0.0;
  for (int s = 0; s < 3; ++s)
    for (std::size_t b = 0; b < ctmc_legacy[s].thr.size(); ++b) {
      worst = std::max(worst, rel_err(des_legacy[s].thr[b],
                                      ctmc_legacy[s].thr[b]));
      ok = ok && within(des_legacy[s].thr[b], ctmc_legacy[s].thr[b], 0.03);
    }
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "simulation vs chain, legacy: worst gap %.2f%% (<=3)", 100 * worst);
  report("5", ok, buf);
}

void criterion_6() {
  // 6a/6b: generator and stationary tolerances on every builtin chain.
  bool stat_ok = true;
  double worst_res = 0.0, worst_sum = 0.0;
  for (const char* which : {"I", "II", "III"})
    for (bool npca : {false, true}) {
      Eval e = eval_chain(builtin_scenario(which, npca).scenario);
      double qmax = e.gen.q.cwiseAbs().maxCoeff();
      double res =
          (e.dist.pi.transpose() * e.gen.q).cwiseAbs().maxCoeff() / qmax;
      worst_res = std::max(worst_res, res);
      worst_sum = std::max(worst_sum, std::abs(e.dist.pi.sum() - 1.0));
      stat_ok = stat_ok && res < 1e-10 && std::abs(e.dist.pi.sum() - 1.0) < 1e-12 &&
                e.dist.pi.minCoeff() >= 0.0;
    }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "stationary solve: max residual %.1e (<1e-10 of max|Q|), max "
                "|sum-1| %.1e (<1e-12)",
                worst_res, worst_sum);
  report("6a", stat_ok, buf);

  // 6c: enabling secondary access must not move the narrow station.
  Eval leg = eval_chain(builtin_scenario("I", false).scenario);
  Eval np = eval_chain(builtin_scenario("I", true).scenario);
  double drift = rel_err(np.thr[1], leg.thr[1]);
  std::snprintf(buf, sizeof buf, "transparency: narrow-station drift %.1e (<1e-6)",
                drift);
  report("6b", drift < 1e-6, buf);

  // 6d: mirror symmetry of the four-station topology.
  ScenarioConfig sym = builtin_scenario("Full", true);
  for (auto& b : sym.scenario.bsses) {
    b.distance_m = 3.0;
    b.mcs_index.reset();
  }
  Eval es = eval_chain(sym.scenario);
  double asym = std::max(rel_err(es.thr[0], es.thr[2]),
                         rel_err(es.thr[1], es.thr[3]));
  std::snprintf(buf, sizeof buf, "mirror symmetry: max asymmetry %.1e (<1e-9)",
                asym);
  report("6c", asym < 1e-9, buf);

  // 6e: ergodic time-average vs stationary distribution, ten million events,
  // for every builtin chain small enough for the bound to make sense.
  bool tv_ok = true;
  double worst_tv = 0.0;
  struct Case {
    const char* which;
    bool npca;
  };
  for (const Case& c : {Case{"I", false}, Case{"I", true}, Case{"II", false},
                        Case{"II", true}, Case{"III", false}}) {
    Eval e = eval_chain(builtin_scenario(c.which, c.npca).scenario);
    if (e.chain.states.size() > 12) continue;
    TrajectorySimulator sim(e.chain, e.gen);
    double rate = 0.0;
    for (int i = 0; i < e.gen.q.rows(); ++i)
      rate += e.dist.pi(i) * -e.gen.q(i, i);
    double duration = 1e7 / rate;
    std::vector<double> occ = sim.occupancy(duration, 1234);
    double tv = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i)
      tv += std::abs(occ[i] - e.dist.pi(static_cast<int>(i)));
    tv *= 0.5;
    worst_tv = std::max(worst_tv, tv);
    tv_ok = tv_ok && tv < 1e-2;
  }
  std::snprintf(buf, sizeof buf,
                "ergodic average: worst TV distance %.2e (<1e-2 at 1e7 events)",
                worst_tv);
  report("6d", tv_ok, buf);

  // 6f: the switch-back deadline is enforced on every secondary burst; the
  // run throws if one ends late, the counter proves it was exercised.
  bool deadline_ok = true;
  long long checks = 0;
  std::string err;
  try {
    for (const char* which : {"I", "III"}) {
      DesOptions o;
      o.duration = 20.0;
      o.seed = 99;
      DesMetrics m = run_des(builtin_scenario(which, true).scenario, o);
      checks += m.npca_deadline_checks;
    }
  } catch (const EngineError& e) {
    deadline_ok = false;
    err = e.what();
  }
  deadline_ok = deadline_ok && checks > 1000;
  std::snprintf(buf, sizeof buf,
                "switch-back deadline: %lld bursts checked, none late%s%s",
                checks, err.empty() ? "" : ", error: ", err.c_str());
  report("6e", deadline_ok, buf);
}

double mean_thr_of(const AggregateReport& rep, std::size_t point,
                   std::size_t bss) {
  return rep.points[point].bsses[bss].throughput_mbps.mean;
}

void criterion_7(double* out_seconds) {
  auto t0 = std::chrono::steady_clock::now();

  // 7a: secondary-access gain across the aggregation-cap grid, randomized
  // distances, 500 instances per point.
  ScenarioConfig off = builtin_scenario("I", false);
  ScenarioConfig on = builtin_scenario("I", true);
  for (ScenarioConfig* c : {&off, &on}) {
    c->randomizers.distance_active = true;
    c->instances = 500;
    c->seed = 7;
  }
  const std::vector<std::string> grid = {"8", "32", "128", "512", "1024"};
  AggregateReport roff = sweep(off, "delta", grid, Engine::Ctmc);
  AggregateReport ron = sweep(on, "delta", grid, Engine::Ctmc);
  std::vector<double> gains;
  for (std::size_t i = 0; i < grid.size(); ++i)
    gains.push_back(mean_thr_of(ron, i, 0) / mean_thr_of(roff, i, 0));
  std::size_t peak =
      std::max_element(gains.begin(), gains.end()) - gains.begin();
  bool a_ok = roff.ok() && ron.ok() && grid[peak] == "128" && gains[2] >= 1.8;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "cap sweep gain: %.2f/%.2f/%.2f/%.2f/%.2f over "
                "8/32/128/512/1024, peak at %s (want 128, >=1.8)",
                gains[0], gains[1], gains[2], gains[3], gains[4],
                grid[peak].c_str());
  report("7a", a_ok, buf);

  // 7b: fixed rate pairs.
  auto gain_for = [](int mcs_a, int mcs_b) {
    BuiltinOptions opt;
    opt.mcs_override["A"] = mcs_a;
    opt.mcs_override["B"] = mcs_b;
    Eval l = eval_chain(builtin_scenario("I", false, opt).scenario);
    Eval n = eval_chain(builtin_scenario("I", true, opt).scenario);
    return n.thr[0] / l.thr[0];
  };
  double fast_slow = gain_for(11, 1);
  std::snprintf(buf, sizeof buf, "rate pair (11,1): gain %.3f (want 3.9+-0.4)",
                fast_slow);
  report("7b-1", std::abs(fast_slow - 3.9) <= 0.4, buf);
  // Known red: this pair computes to 1.1124. The value is structural (six
  // secondary packets per 1.675 ms blocker yields ~11% uplift), insensitive
  // to the overhead mode within +-0.003, and sits just above the published
  // bound. Left failing rather than widening the gate.
  double slow_fast = gain_for(1, 11);
  std::snprintf(buf, sizeof buf, "rate pair (1,11): gain %.4f (want <=1.1)",
                slow_fast);
  report("7b-2", slow_fast <= 1.1, buf);

  // 7c: three-station aggregate throughput over 500 randomized instances.
  ScenarioConfig two_off = builtin_scenario("II", false);
  ScenarioConfig two_on = builtin_scenario("II", true);
  for (ScenarioConfig* c : {&two_off, &two_on}) {
    c->randomizers.distance_active = true;
    c->instances = 500;
    c->seed = 7;
  }
  AggregateReport al = monte_carlo(two_off, Engine::Ctmc);
  AggregateReport an = monte_carlo(two_on, Engine::Ctmc);
  double agg_l = 0.0, agg_n = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    agg_l += mean_thr_of(al, 0, b);
    agg_n += mean_thr_of(an, 0, b);
  }
  double spent = seconds_since(t0);
  bool c_ok = al.ok() && an.ok() && within(agg_l, 650.0, 0.08) &&
              within(agg_n, 626.0, 0.08) && spent < 120.0;
  std::snprintf(buf, sizeof buf,
                "aggregate at full activity: legacy %.1f (650+-8%%), "
                "secondary-access %.1f (626+-8%%), %.1f s (<120)",
                agg_l, agg_n, spent);
  report("7c", c_ok, buf);

  // 7d: median per-instance gain over 500 randomized instances, distances and
  // cap drawn. Instance draws depend only on (seed, index), so the two runs
  // see identical tuples and each gain is a paired ratio; the gain
  // distribution has a dominant atom (cap saturation x discrete rate steps)
  // that makes this median stable where the ratio of marginal medians is not.
  ScenarioConfig med_off = builtin_scenario("I", false);
  ScenarioConfig med_on = builtin_scenario("I", true);
  for (ScenarioConfig* c : {&med_off, &med_on}) {
    c->randomizers.distance_active = true;
    c->randomizers.delta_active = true;
    c->instances = 500;
    c->seed = 7;
  }
  bool d_ok = false;
  std::string d_detail;
  try {
    std::vector<double> gains;
    for (int i = 0; i < med_off.instances; ++i) {
      Eval off = eval_chain(instance_scenario(med_off, i));
      Eval on = eval_chain(instance_scenario(med_on, i));
      gains.push_back(on.thr[0] / off.thr[0]);
    }
    double ratio = box_stats(gains).median;
    d_ok = std::abs(ratio - 1.5) <= 0.15;
    std::snprintf(buf, sizeof buf,
                  "median wide-station gain: %.3f (want 1.5+-0.15)", ratio);
    d_detail = buf;
  } catch (const std::exception& e) {
    d_detail = std::string("instance evaluation failed: ") + e.what();
  }
  report("7d", d_ok, d_detail);

  *out_seconds = seconds_since(t0);
}

void criterion_8(const char* cli_path) {
  if (!cli_path) {
    report("8", false, "cli path not passed as argv[1]");
    return;
  }
  std::string first = run_cli(cli_path, "reproduce-tables --seed 7");
  std::string second = run_cli(cli_path, "reproduce-tables --seed 7");
  bool ok = !first.empty() && first == second &&
            first.rfind("scenario,engine,", 0) == 0;
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "table reproduction determinism: %zu bytes, reruns %s",
                first.size(), first == second ? "identical" : "DIFFER");
  report("8", ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  criterion_1();
  std::vector<Eval> ctmc_legacy = criterion_2();
  criterion_3();
  std::vector<DesTable> des_legacy = criterion_4();
  criterion_5(ctmc_legacy, des_legacy);
  criterion_6();
  double fig_seconds = 0.0;
  criterion_7(&fig_seconds);
  criterion_8(cli);
  std::printf("%d failed\n", g_failures);
  return g_failures;
}
