#include "npca/ctmc.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "npca/errors.hpp"

namespace npca {

bool CtmcState::contains_bss(int bss) const {
  return std::any_of(txs.begin(), txs.end(),
                     [bss](const ActiveTx& t) { return t.bss == bss; });
}

BandSet CtmcState::busy() const {
  BandSet b;
  for (const auto& t : txs) b = b.unioned(t.band);
  return b;
}

TransmissionProfile transmission_profile_for(const Scenario& scenario,
                                             const BssSpec& bss, BandSet band,
                                             TxKind kind,
                                             const TransmissionProfile* blocker) {
  const PhyParams& phy = scenario.phy;
  McsProfile mcs = bss.mcs();
  ChannelWidthProfile width = width_profile(band.width_mhz());
  double budget = phy.t_max;
  if (kind == TxKind::Npca) {
    if (blocker == nullptr) throw EngineError("npca profile needs a blocker");
    budget = std::min(npca_budget(phy, blocker->duration), phy.t_max);
  }
  TransmissionProfile prof;
  prof.band = band;
  prof.kind = kind;
  prof.n_packets = max_packets_within(phy, budget, bss.payload_bits, mcs, width,
                                      bss.n_ss, bss.delta);
  if (prof.n_packets >= 1) {
    prof.duration = txop_duration(phy, prof.n_packets, bss.payload_bits, mcs,
                                  width, bss.n_ss);
    prof.mu = 1.0 / prof.duration;
  }
  return prof;
}

namespace {

struct StateBuild {
  CtmcState state;
  std::vector<TransmissionProfile> profiles;
};

void sort_state(StateBuild& sb) {
  // Keep txs ordered by bss index with profiles riding along.
  std::vector<size_t> order(sb.state.txs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return sb.state.txs[a].bss < sb.state.txs[b].bss;
  });
  CtmcState s;
  std::vector<TransmissionProfile> p;
  for (size_t i : order) {
    s.txs.push_back(sb.state.txs[i]);
    p.push_back(sb.profiles[i]);
  }
  sb.state = std::move(s);
  sb.profiles = std::move(p);
}

}  // namespace

ChainSkeleton enumerate_states(const Scenario& scenario) {
  scenario.validate();
  const auto& bsses = scenario.bsses;

  ChainSkeleton out;
  out.scenario = scenario;

  std::map<CtmcState, int> index;
  std::vector<std::vector<TransmissionProfile>>& profiles = out.profiles;

  auto intern = [&](StateBuild sb) -> int {
    sort_state(sb);
    auto it = index.find(sb.state);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(out.states.size());
    index.emplace(sb.state, id);
    out.states.push_back(std::move(sb.state));
    profiles.push_back(std::move(sb.profiles));
    return id;
  };

  intern(StateBuild{});  // state 0
  for (size_t si = 0; si < out.states.size(); ++si) {
    // Copies: out.states grows while we expand.
    CtmcState s = out.states[si];
    std::vector<TransmissionProfile> sp = profiles[si];
    BandSet busy = s.busy();

    for (size_t n = 0; n < bsses.size(); ++n) {
      const BssSpec& bss = bsses[n];
      if (s.contains_bss(static_cast<int>(n))) continue;
      double lambda = lambda_from_cw(scenario.phy, bss.cw_min, bss.alpha);

      if (!busy.contains(bss.primary_unit)) {
        BandSet band = widest_idle_subband(bss.allocation, bss.primary_unit, busy);
        TxKind kind = (band == bss.allocation) ? TxKind::Legacy : TxKind::Dcb;
        StateBuild next{s, sp};
        next.state.txs.push_back({static_cast<int>(n), band, kind, -1});
        next.profiles.push_back(
            transmission_profile_for(scenario, bss, band, kind, nullptr));
        int to = intern(std::move(next));
        out.transitions.push_back({static_cast<int>(si), to, lambda,
                                   Transition::Kind::Access, static_cast<int>(n)});
      } else if (bss.npca_enabled) {
        // The primary is covered. NPCA needs a single identifiable blocker
        // over the primary half and a fully idle NPCA band.
        BandSet half = bss.primary_half();
        BandSet npca = bss.npca_band();
        int blocker_pos = -1;
        int overlapping = 0;
        for (size_t k = 0; k < s.txs.size(); ++k) {
          if (s.txs[k].band.overlaps(half)) {
            ++overlapping;
            blocker_pos = static_cast<int>(k);
          }
        }
        if (overlapping != 1 || npca.empty() || busy.overlaps(npca)) continue;
        TransmissionProfile prof = transmission_profile_for(
            scenario, bss, npca, TxKind::Npca, &sp[blocker_pos]);
        if (prof.n_packets < 1) continue;  // opportunity too short
        StateBuild next{s, sp};
        next.state.txs.push_back({static_cast<int>(n), npca, TxKind::Npca,
                                  s.txs[blocker_pos].bss});
        next.profiles.push_back(prof);
        int to = intern(std::move(next));
        out.transitions.push_back({static_cast<int>(si), to, lambda,
                                   Transition::Kind::NpcaAccess,
                                   static_cast<int>(n)});
      }
    }

    for (size_t k = 0; k < s.txs.size(); ++k) {
      const ActiveTx& t = s.txs[k];
      StateBuild next;
      if (t.kind != TxKind::Npca) {
        // The blocker's end also ends anyone riding it.
        for (size_t j = 0; j < s.txs.size(); ++j) {
          if (j == k) continue;
          if (s.txs[j].kind == TxKind::Npca && s.txs[j].blocker == t.bss) continue;
          next.state.txs.push_back(s.txs[j]);
          next.profiles.push_back(sp[j]);
        }
        int to = intern(std::move(next));
        out.transitions.push_back({static_cast<int>(si), to, sp[k].mu,
                                   Transition::Kind::Completion, t.bss});
      } else {
        // An NPCA burst also ends on its own, back to the blocker-only state.
        for (size_t j = 0; j < s.txs.size(); ++j) {
          if (j == k) continue;
          next.state.txs.push_back(s.txs[j]);
          next.profiles.push_back(sp[j]);
        }
        int to = intern(std::move(next));
        out.transitions.push_back({static_cast<int>(si), to, sp[k].mu,
                                   Transition::Kind::NpcaCompletion, t.bss});
      }
    }
  }
  return out;
}

GeneratorMatrix build_generator(const ChainSkeleton& skeleton) {
  int n = static_cast<int>(skeleton.states.size());
  GeneratorMatrix gen;
  gen.q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : skeleton.transitions) gen.q(t.from, t.to) += t.rate;
  for (int i = 0; i < n; ++i) {
    gen.q(i, i) = 0.0;
    gen.q(i, i) = -gen.q.row(i).sum();
  }
  return gen;
}

StationaryDistribution stationary(const GeneratorMatrix& gen) {
  int n = static_cast<int>(gen.q.rows());
  // pi Q = 0 with the last column of Q swapped for the sum-to-one constraint;
  // transposed so the dense LU sees an ordinary Ax = b.
  Eigen::MatrixXd m = gen.q;
  m.col(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = m.transpose().partialPivLu().solve(rhs);

  double qmax = gen.q.cwiseAbs().maxCoeff();
  double residual = (pi.transpose() * gen.q).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10 * qmax))
    throw EngineError("stationary solve residual " + std::to_string(residual));
  for (int i = 0; i < n; ++i) {
    if (pi(i) < -1e-12)
      throw EngineError("stationary distribution has a negative entry");
    if (pi(i) < 0) pi(i) = 0.0;
  }
  double total = pi.sum();
  if (!(std::abs(total - 1.0) < 1e-9))
    throw EngineError("stationary distribution does not normalize");
  pi /= total;
  return {pi};
}

std::vector<double> throughput(const StationaryDistribution& dist,
                               const ChainSkeleton& skeleton) {
  const Scenario& sc = skeleton.scenario;
  std::vector<double> gamma(sc.bsses.size(), 0.0);
  for (size_t i = 0; i < skeleton.states.size(); ++i) {
    for (size_t k = 0; k < skeleton.states[i].txs.size(); ++k) {
      const ActiveTx& t = skeleton.states[i].txs[k];
      const TransmissionProfile& prof = skeleton.profiles[i][k];
      gamma[t.bss] += prof.mu * static_cast<double>(prof.n_packets) * dist.pi(i);
    }
  }
  for (size_t n = 0; n < gamma.size(); ++n)
    gamma[n] *= (1.0 - sc.phy.per) * static_cast<double>(sc.bsses[n].payload_bits);
  return gamma;
}

std::vector<double> access_delay_closed_form(const StationaryDistribution& dist,
                                             const ChainSkeleton& skeleton) {
  std::vector<double> rate(skeleton.scenario.bsses.size(), 0.0);
  for (const auto& t : skeleton.transitions) {
    if (t.kind == Transition::Kind::Access ||
        t.kind == Transition::Kind::NpcaAccess)
      rate[t.bss] += dist.pi(t.from) * t.rate;
  }
  std::vector<double> delay(rate.size(), 0.0);
  for (size_t i = 0; i < rate.size(); ++i)
    delay[i] = rate[i] > 0 ? 1.0 / rate[i] : 0.0;
  return delay;
}

}  // namespace npca
