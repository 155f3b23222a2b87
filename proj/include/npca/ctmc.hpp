#pragma once

#include <Eigen/Dense>
#include <vector>

#include "npca/band.hpp"
#include "npca/scenario.hpp"

namespace npca {

enum class TxKind { Legacy, Dcb, Npca };

// One packet burst as the chain sees it: N packets back to back, mean holding
// time duration, completion rate mu = 1/duration.
struct TransmissionProfile {
  long long n_packets = 0;
  double duration = 0.0;
  double mu = 0.0;
  BandSet band;
  TxKind kind = TxKind::Legacy;
};

struct ActiveTx {
  int bss = -1;  // index into Scenario::bsses
  BandSet band;
  TxKind kind = TxKind::Legacy;
  int blocker = -1;  // bss index of the transmission being ridden, Npca only

  friend auto operator<=>(const ActiveTx&, const ActiveTx&) = default;
};

// Set of concurrent transmissions; txs sorted by bss index, bands pairwise
// disjoint. The empty set is state 0.
struct CtmcState {
  std::vector<ActiveTx> txs;

  bool contains_bss(int bss) const;
  BandSet busy() const;

  friend auto operator<=>(const CtmcState&, const CtmcState&) = default;
};

struct Transition {
  enum class Kind { Access, NpcaAccess, Completion, NpcaCompletion };
  int from = 0;
  int to = 0;
  double rate = 0.0;
  Kind kind = Kind::Access;
  int bss = -1;  // the BSS gaining (Access) or losing (Completion) a tx
};

// States plus labeled transitions plus the per-state transmission profiles
// (profiles[i][k] describes states[i].txs[k]). Self-contained: keeps its own
// copy of the scenario it was enumerated from.
struct ChainSkeleton {
  Scenario scenario;
  std::vector<CtmcState> states;
  std::vector<std::vector<TransmissionProfile>> profiles;
  std::vector<Transition> transitions;
};

// Breadth-first closure from state 0. Accesses claim the widest idle aligned
// sub-band holding the primary; an NPCA-capable BSS whose primary is covered
// by exactly one foreign transmission may instead contend on its (fully idle)
// NPCA band. Non-NPCA completions also sweep any NPCA transmissions riding
// them; NPCA transmissions additionally complete on their own, returning to
// the blocker-only state.
ChainSkeleton enumerate_states(const Scenario& scenario);

// Packet count and holding time for one transmission. For Npca, the budget is
// the blocker's holding time minus the switch overheads, further capped by
// t_max; n_packets == 0 signals an opportunity too short to use.
TransmissionProfile transmission_profile_for(const Scenario& scenario,
                                             const BssSpec& bss, BandSet band,
                                             TxKind kind,
                                             const TransmissionProfile* blocker);

struct GeneratorMatrix {
  Eigen::MatrixXd q;  // row sums 0, off-diagonals >= 0
};

GeneratorMatrix build_generator(const ChainSkeleton& skeleton);

struct StationaryDistribution {
  Eigen::VectorXd pi;  // pi >= 0, sums to 1, pi * Q = 0
};

// Dense partial-pivot solve of pi Q = 0 with one column replaced by the
// normalization constraint. Throws EngineError when the residual check fails.
StationaryDistribution stationary(const GeneratorMatrix& gen);

// Per-BSS delivered bits/second: (1 - PER) * L * sum over states of mu * N * pi.
std::vector<double> throughput(const StationaryDistribution& dist,
                               const ChainSkeleton& skeleton);

// Mean time between consecutive channel accesses per BSS: the inverse of the
// stationary access rate over all transitions that add a transmission.
std::vector<double> access_delay_closed_form(const StationaryDistribution& dist,
                                             const ChainSkeleton& skeleton);

}  // namespace npca
