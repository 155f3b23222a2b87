#pragma once

#include <cstdint>
#include <optional>

namespace npca {

// Exact bits-per-subcarrier value (modulation bits x coding rate).
struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct McsProfile {
  int index = 0;  // 1..11
  Rational bits_per_subcarrier;
  const char* label = "";
};

// index outside 1..11 throws ConfigError.
McsProfile mcs_profile(int index);

// Deterministic distance -> MCS map, monotone non-increasing in d and
// independent of channel width. Swap out mcs_profile/this pair to recalibrate.
McsProfile mcs_from_distance(double d_meters);

struct ChannelWidthProfile {
  int width_mhz = 0;         // 20, 40, 80, 160
  int data_subcarriers = 0;  // 234, 468, 980, 1960
};

// width outside {20,40,80,160} throws ConfigError.
ChannelWidthProfile width_profile(int width_mhz);

struct PhyParams {
  double slot_time = 9e-6;        // T_e
  double difs = 34e-6;
  double sifs = 16e-6;
  double ofdm_symbol = 13.6e-6;
  double legacy_preamble = 20e-6;
  double he_preamble = 100e-6;    // T_PHY
  int rts_bits = 160;
  int cts_bits = 112;
  int back_bits = 240;
  int mac_header_bits = 240;      // L_H
  int mpdu_delimiter_bits = 32;   // L_D
  int tail_bits = 18;             // L_T
  // Control frames (RTS/CTS/BACK) go out over 20 MHz, one spatial stream, at
  // this basic rate behind a legacy preamble. 6 Mbps keeps the computed
  // aggregation limits within 3% of the calibrated ones.
  double control_rate = 6e6;
  double t_npca = 136e-6;
  double t_switch = 16e-6;
  double t_max = 5e-3;            // TXOP cap
  double per = 0.1;
  double t_collision = 150e-6;    // channel hold of an RTS collision
  // Total airtime of all three control frames; replaces the computed value.
  // 274e-6 makes the 968/484/29 aggregation limits exact.
  std::optional<double> ctrl_overhead_override;

  void validate() const;  // throws ConfigError
};

// data_subcarriers x bits_per_subcarrier x n_ss; non-integer values are kept
// exact until the symbol count is rounded.
double dbps(const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss);

// ceil(total_bits / DBPS), computed in integer arithmetic.
long long symbol_count(long long total_bits, const McsProfile& mcs,
                       const ChannelWidthProfile& width, int n_ss);

// Airtime of RTS + CTS + BACK (or the override when set).
double control_overhead(const PhyParams& p);

// T_PHY + ceil((L_H + N(L_D + L) + L_T)/DBPS) * T_OFDM.
double data_duration(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss);

// The on-air RTS..BACK exchange: control frames + 3 SIFS + data. This is the
// window the channel is actually held; DIFS and the access slot are spent by
// the contenders themselves.
double frame_airtime(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss);

// Full per-transmission cycle: frame airtime + DIFS + one slot.
double txop_duration(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss);

// Largest N with txop_duration(N) <= budget, capped at delta; 0 when even a
// single packet does not fit.
long long max_packets_within(const PhyParams& p, double budget, long long payload_bits,
                             const McsProfile& mcs, const ChannelWidthProfile& width,
                             int n_ss, long long delta);

// max(0, t_obss - T_NPCA - T_switch).
double npca_budget(const PhyParams& p, double t_obss);

// alpha * 2 / ((cw - 1) * slot); cw < 2 throws ConfigError.
double lambda_from_cw(const PhyParams& p, int cw, double alpha);

}  // namespace npca
