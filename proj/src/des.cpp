#include "npca/des.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <random>

#include "npca/errors.hpp"
#include "npca/phy.hpp"

namespace npca {

namespace {

using ps_t = long long;
constexpr ps_t kInf = std::numeric_limits<ps_t>::max();

ps_t to_ps(double seconds) { return std::llround(seconds * 1e12); }

inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
}

inline int uniform_counter(std::mt19937_64& rng, int cw) {
  int v = static_cast<int>(unit_uniform(rng) * cw);  // [0, cw-1]
  return std::min(v, cw - 1);
}

struct HeapEvent {
  ps_t time;
  enum Kind { BusyEnd, NpcaSwitch } kind;
  int bss;             // NpcaSwitch target
  int expected_owner;  // NpcaSwitch: the blocking bss
  ps_t expected_end;   // NpcaSwitch: the blocker's busy end
};

struct HeapOrder {
  bool operator()(const HeapEvent& a, const HeapEvent& b) const {
    return a.time > b.time;
  }
};

struct Welford {
  long long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stddev() const {
    return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  }
};

struct Station {
  const BssSpec* spec;
  BandSet alloc;
  int primary;
  bool npca_cap;
  BandSet npca_band;
  int npca_unit;                        // lowest unit of npca_band, -1 if none
  std::array<long long, 4> n_by_log{};  // packets per band of 1,2,4,8 units
  std::array<ps_t, 4> airtime_by_log{};
  // contention state
  bool npca_mode = false;
  int cw;
  int counter = 0;
  bool have_counter = false;
  ps_t arrived = 0;  // listening on the current contention unit since here
  ps_t blocker_end = 0;
  // tallies
  long long attempts = 0, collisions = 0, successes = 0, npca_txops = 0;
  long long delivered_bits = 0;
  Welford delay;
  ps_t last_back_end = 0;
};

class Des {
public:
  Des(const Scenario& scenario, const DesOptions& options)
      : sc_(scenario), opt_(options), rng_(options.seed) {
    slot_ = to_ps(sc_.phy.slot_time);
    difs_ = to_ps(sc_.phy.difs);
    t_npca_ = to_ps(sc_.phy.t_npca);
    t_switch_ = to_ps(sc_.phy.t_switch);
    t_coll_ = to_ps(sc_.phy.t_collision);
    end_ = to_ps(options.duration);
    busy_until_.fill(0);
    owner_.fill(-1);
    decoded_.fill(false);
    for (const auto& b : sc_.bsses) {
      Station st;
      st.spec = &b;
      st.alloc = b.allocation;
      st.primary = b.primary_unit;
      st.npca_cap = b.npca_enabled;
      st.npca_band = b.npca_band();
      st.npca_unit = st.npca_band.empty() ? -1 : st.npca_band.lowest_unit();
      st.cw = b.cw_min;
      McsProfile mcs = b.mcs();
      for (int lg = 0; lg < 4; ++lg) {
        int size = 1 << lg;
        if (size > b.allocation.unit_count()) break;
        ChannelWidthProfile w = width_profile(20 * size);
        long long n = max_packets_within(sc_.phy, sc_.phy.t_max,
                                         b.payload_bits, mcs, w, b.n_ss,
                                         b.delta);
        if (n < 1)
          throw ConfigError("bss " + b.id + ": a single frame at " +
                            std::to_string(20 * size) +
                            " MHz does not fit within t_max");
        st.n_by_log[lg] = n;
        st.airtime_by_log[lg] =
            to_ps(frame_airtime(sc_.phy, n, b.payload_bits, mcs, w, b.n_ss));
      }
      stations_.push_back(st);
    }
  }

  DesMetrics run();

private:
  bool unit_busy(int u, ps_t now) const { return busy_until_[u] > now; }
  BandSet busy_set(ps_t now) const {
    BandSet b;
    for (int u = 0; u < 16; ++u)
      if (unit_busy(u, now)) b = b.unioned(BandSet::block(u, 1));
    return b;
  }

  int contend_unit(const Station& st) const {
    return st.npca_mode ? st.npca_unit : st.primary;
  }

  // Fold completed idle slots into the counter. Partial slots are lost, as
  // with a real freeze at the next slot boundary.
  void bank(Station& st, ps_t now) {
    int u = contend_unit(st);
    if (u < 0 || unit_busy(u, now) || !st.have_counter) return;
    ps_t gate = std::max(busy_until_[u], st.arrived);
    ps_t progressed = now - gate - difs_;
    if (progressed <= 0) return;
    long long slots = progressed / slot_;
    st.counter -= static_cast<int>(std::min<long long>(slots, st.counter));
    st.arrived = now;
  }

  // Counters are drawn only when a station actually starts contending, in
  // station order, which keeps runs reproducible. A source with alpha < 1
  // sits out a geometric number of extra windows so its idle-channel access
  // rate scales by alpha, matching lambda_from_cw.
  void ensure_counter(Station& st) {
    if (st.have_counter) return;
    int c = uniform_counter(rng_, st.cw);
    while (unit_uniform(rng_) > st.spec->alpha)
      c += uniform_counter(rng_, st.cw) + 1;
    st.counter = c;
    st.have_counter = true;
  }

  // Largest N <= the t_max cap whose airtime fits the window; 0 if none.
  long long admit_npca(const Station& st, ps_t window) const {
    int lg =
        std::countr_zero(static_cast<unsigned>(st.npca_band.unit_count()));
    long long cap = st.n_by_log[lg];
    const BssSpec& b = *st.spec;
    McsProfile mcs = b.mcs();
    ChannelWidthProfile w = width_profile(st.npca_band.width_mhz());
    auto airtime = [&](long long n) {
      return to_ps(frame_airtime(sc_.phy, n, b.payload_bits, mcs, w, b.n_ss));
    };
    if (cap < 1 || airtime(1) > window) return 0;
    long long lo = 1, hi = cap;
    while (lo < hi) {
      long long mid = (lo + hi + 1) / 2;
      if (airtime(mid) <= window)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  struct Fire {
    ps_t time = kInf;
    long long n_admitted = 0;
  };

  // Earliest transmit instant under the current channel timeline; kInf while
  // the contention unit is busy or an NPCA burst cannot clear its deadline.
  Fire next_fire(Station& st, ps_t now) {
    int u = contend_unit(st);
    if (u < 0 || unit_busy(u, now)) return {};
    ensure_counter(st);
    ps_t gate = std::max(busy_until_[u], st.arrived);
    ps_t t = gate + difs_ + static_cast<ps_t>(st.counter) * slot_;
    if (st.npca_mode) {
      for (int v = 0; v < 16; ++v)
        if (st.npca_band.contains(v)) t = std::max(t, busy_until_[v]);
      ps_t window = st.blocker_end - t_switch_ - t;
      if (window <= 0) return {};
      long long n = admit_npca(st, window);
      if (n < 1) return {};
      return {t, n};
    }
    return {t, 0};
  }

  void place_busy(BandSet band, ps_t from, ps_t until, int owner, bool decoded,
                  bool assert_idle) {
    // Contenders listening on these units bank their progress first.
    for (auto& st : stations_) {
      int u = contend_unit(st);
      if (u >= 0 && band.contains(u)) bank(st, from);
    }
    for (int u = 0; u < 16; ++u) {
      if (!band.contains(u)) continue;
      if (assert_idle) {
        ++exclusivity_checks_;
        if (busy_until_[u] > from)
          throw EngineError("overlapping successful transmissions on unit " +
                            std::to_string(u));
      }
      busy_until_[u] = std::max(busy_until_[u], until);
      owner_[u] = owner;
      decoded_[u] = decoded;
    }
    heap_.push({until, HeapEvent::BusyEnd, -1, -1, 0});
  }

  void trace(ps_t t, const std::string& who, const char* what,
             const std::string& detail) {
    if (!opt_.trace) return;
    char head[64];
    std::snprintf(head, sizeof head, "%.6f", static_cast<double>(t) * 1e-12);
    *opt_.trace << head << '\t' << who << '\t' << what << '\t' << detail
                << '\n';
  }

  void handle_busy_end(ps_t now);
  void handle_npca_switch(const HeapEvent& ev, ps_t now);
  void resolve_fires(const std::vector<int>& who,
                     const std::vector<long long>& n_adm, ps_t now);

  const Scenario& sc_;
  const DesOptions& opt_;
  std::mt19937_64 rng_;
  ps_t slot_, difs_, t_npca_, t_switch_, t_coll_, end_;
  std::array<ps_t, 16> busy_until_;
  std::array<int, 16> owner_;
  std::array<bool, 16> decoded_;
  std::vector<Station> stations_;
  std::priority_queue<HeapEvent, std::vector<HeapEvent>, HeapOrder> heap_;
  long long exclusivity_checks_ = 0;
  long long npca_deadline_checks_ = 0;
};

void Des::handle_busy_end(ps_t now) {
  // NPCA followers whose blocker just ended return to their own primary. The
  // admission deadline guarantees none of them is mid-burst here. A counter
  // drawn but not consumed carries back: one backoff instance per BSS.
  for (auto& st : stations_) {
    if (!st.npca_mode || st.blocker_end != now) continue;
    bank(st, now);
    st.npca_mode = false;
    st.arrived = now;
    trace(now, st.spec->id, "switch_back", "");
  }
}

void Des::handle_npca_switch(const HeapEvent& ev, ps_t now) {
  Station& st = stations_[ev.bss];
  if (st.npca_mode) return;
  int u = st.primary;
  // Only if the same decoded foreign burst is still running.
  if (busy_until_[u] != ev.expected_end || owner_[u] != ev.expected_owner ||
      !decoded_[u] || busy_until_[u] <= now)
    return;
  st.npca_mode = true;
  st.blocker_end = ev.expected_end;
  st.arrived = now;
  trace(now, st.spec->id, "switch_npca",
        "blocker=" + sc_.bsses[ev.expected_owner].id);
}

void Des::resolve_fires(const std::vector<int>& who,
                        const std::vector<long long>& n_adm, ps_t now) {
  struct Shot {
    int st;
    BandSet band;
    long long n;
    ps_t airtime;
    bool npca;
  };
  std::vector<Shot> shots;
  BandSet busy_now = busy_set(now);
  for (size_t i = 0; i < who.size(); ++i) {
    Station& st = stations_[who[i]];
    Shot s;
    s.st = who[i];
    s.npca = st.npca_mode;
    if (st.npca_mode) {
      s.band = st.npca_band;
      s.n = n_adm[i];
      const BssSpec& b = *st.spec;
      s.airtime = to_ps(frame_airtime(sc_.phy, s.n, b.payload_bits, b.mcs(),
                                      width_profile(s.band.width_mhz()),
                                      b.n_ss));
    } else {
      s.band = widest_idle_subband(st.alloc, st.primary, busy_now);
      int lg = std::countr_zero(static_cast<unsigned>(s.band.unit_count()));
      s.n = st.n_by_log[lg];
      s.airtime = st.airtime_by_log[lg];
    }
    st.counter = 0;
    st.have_counter = false;  // consumed by this attempt
    shots.push_back(s);
  }

  // Simultaneous shots whose bands overlap collide; group them.
  std::vector<int> comp(shots.size());
  for (size_t i = 0; i < shots.size(); ++i) comp[i] = static_cast<int>(i);
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < shots.size(); ++i)
      for (size_t j = i + 1; j < shots.size(); ++j)
        if (shots[i].band.overlaps(shots[j].band) && comp[i] != comp[j]) {
          int from = std::max(comp[i], comp[j]);
          int to = std::min(comp[i], comp[j]);
          for (auto& c : comp)
            if (c == from) c = to;
          merged = true;
        }
  }

  for (size_t c = 0; c < shots.size(); ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < shots.size(); ++i)
      if (comp[i] == static_cast<int>(c)) members.push_back(i);
    if (members.empty()) continue;

    if (members.size() == 1) {
      const Shot& s = shots[members[0]];
      Station& st = stations_[s.st];
      ps_t back_end = now + s.airtime;
      place_busy(s.band, now, back_end, s.st, true, true);
      ++st.attempts;
      ++st.successes;
      st.cw = st.spec->cw_min;
      for (long long k = 0; k < s.n; ++k)
        if (unit_uniform(rng_) > sc_.phy.per)
          st.delivered_bits += st.spec->payload_bits;
      st.delay.add(static_cast<double>(back_end - st.last_back_end) * 1e-12);
      st.last_back_end = back_end;
      if (s.npca) {
        ++st.npca_txops;
        ++npca_deadline_checks_;
        if (back_end > st.blocker_end - t_switch_)
          throw EngineError("npca burst missed its switch-back deadline");
      } else {
        // A decoded foreign burst over a primary pulls that BSS onto its
        // NPCA band once the switch delay elapses.
        for (size_t o = 0; o < stations_.size(); ++o) {
          Station& other = stations_[o];
          if (static_cast<int>(o) == s.st || !other.npca_cap ||
              other.npca_mode || other.npca_unit < 0)
            continue;
          if (s.band.contains(other.primary))
            heap_.push({now + t_npca_, HeapEvent::NpcaSwitch,
                        static_cast<int>(o), s.st, back_end});
        }
      }
      trace(now, st.spec->id, s.npca ? "npca_tx" : "tx",
            s.band.to_string() + " n=" + std::to_string(s.n));
    } else {
      ps_t until = now + t_coll_;
      std::string ids;
      for (size_t i : members) {
        Station& st = stations_[shots[i].st];
        ++st.attempts;
        ++st.collisions;
        st.cw = std::min(st.cw * 2, st.spec->cw_max);
        ids += (ids.empty() ? "" : "+") + st.spec->id;
      }
      for (size_t i : members)
        place_busy(shots[i].band, now, until, -1, false, false);
      trace(now, ids, "collision", "");
    }
  }
}

DesMetrics Des::run() {
  ps_t now = 0;
  std::vector<int> firing;
  std::vector<long long> firing_n;
  while (true) {
    ps_t t_heap = heap_.empty() ? kInf : heap_.top().time;
    ps_t t_fire = kInf;
    firing.clear();
    firing_n.clear();
    for (size_t i = 0; i < stations_.size(); ++i) {
      Fire f = next_fire(stations_[i], now);
      if (f.time < t_fire) {
        t_fire = f.time;
        firing.clear();
        firing_n.clear();
      }
      if (f.time == t_fire && f.time != kInf) {
        firing.push_back(static_cast<int>(i));
        firing_n.push_back(f.n_admitted);
      }
    }
    ps_t t_next = std::min(t_heap, t_fire);
    if (t_next == kInf || t_next >= end_) break;
    if (t_heap <= t_fire) {
      // Channel releases and switch completions change what can fire, so
      // drain everything at this instant and look again.
      now = t_heap;
      while (!heap_.empty() && heap_.top().time == now) {
        HeapEvent ev = heap_.top();
        heap_.pop();
        if (ev.kind == HeapEvent::BusyEnd)
          handle_busy_end(now);
        else
          handle_npca_switch(ev, now);
      }
      continue;
    }
    now = t_fire;
    resolve_fires(firing, firing_n, now);
  }

  DesMetrics m;
  m.duration = opt_.duration;
  m.exclusivity_checks = exclusivity_checks_;
  m.npca_deadline_checks = npca_deadline_checks_;
  for (const auto& st : stations_) {
    DesPerBss p;
    p.throughput_bps = static_cast<double>(st.delivered_bits) / opt_.duration;
    p.mean_delay_s = st.delay.mean;
    p.delay_stddev_s = st.delay.stddev();
    p.delay_samples = st.delay.n;
    p.attempts = st.attempts;
    p.collisions = st.collisions;
    p.successes = st.successes;
    p.npca_txops = st.npca_txops;
    p.collision_prob = st.attempts > 0 ? static_cast<double>(st.collisions) /
                                             static_cast<double>(st.attempts)
                                       : 0.0;
    m.per_bss.push_back(p);
  }
  return m;
}

}  // namespace

DesMetrics run_des(const Scenario& scenario, const DesOptions& options) {
  if (!(options.duration > 0)) throw ConfigError("duration must be positive");
  scenario.validate();
  Des des(scenario, options);
  return des.run();
}

double collision_probability_check(int n_contenders, double duration,
                                   std::uint64_t seed) {
  if (n_contenders < 2) throw ConfigError("need at least two contenders");
  Scenario sc;
  for (int i = 0; i < n_contenders; ++i) {
    BssSpec b;
    b.id = "S" + std::to_string(i);
    b.allocation = BandSet::block(0, 4);
    b.primary_unit = 0;
    b.mcs_index = 11;
    sc.bsses.push_back(b);
  }
  DesOptions opt;
  opt.duration = duration;
  opt.seed = seed;
  DesMetrics m = run_des(sc, opt);
  double sum = 0;
  for (const auto& p : m.per_bss) sum += p.collision_prob;
  return sum / n_contenders;
}

}  // namespace npca
