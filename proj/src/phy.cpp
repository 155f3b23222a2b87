#include "npca/phy.hpp"

#include <algorithm>
#include <cmath>

#include "npca/errors.hpp"

namespace npca {

namespace {

// Index 1 is BPSK 1/2; the rest follow the 802.11ax ladder from QPSK 3/4 up.
constexpr McsProfile kMcsTable[] = {
    {1, {1, 2}, "BPSK 1/2"},
    {2, {3, 2}, "QPSK 3/4"},
    {3, {2, 1}, "16-QAM 1/2"},
    {4, {3, 1}, "16-QAM 3/4"},
    {5, {4, 1}, "64-QAM 2/3"},
    {6, {9, 2}, "64-QAM 3/4"},
    {7, {5, 1}, "64-QAM 5/6"},
    {8, {6, 1}, "256-QAM 3/4"},
    {9, {20, 3}, "256-QAM 5/6"},
    {10, {15, 2}, "1024-QAM 3/4"},
    {11, {25, 3}, "1024-QAM 5/6"},
};

}  // namespace

McsProfile mcs_profile(int index) {
  if (index < 1 || index > 11)
    throw ConfigError("mcs index must be in 1..11, got " + std::to_string(index));
  return kMcsTable[index - 1];
}

McsProfile mcs_from_distance(double d_meters) {
  if (d_meters <= 0) throw ConfigError("distance must be positive");
  if (d_meters < 1.5) return mcs_profile(11);
  // Log-linear in d, pinned at 1.5 m -> 11 and 17 m -> 1.
  double idx = 11.0 - 10.0 * std::log(d_meters / 1.5) / std::log(17.0 / 1.5);
  int i = static_cast<int>(std::lround(idx));
  return mcs_profile(std::clamp(i, 1, 11));
}

ChannelWidthProfile width_profile(int width_mhz) {
  switch (width_mhz) {
    case 20: return {20, 234};
    case 40: return {40, 468};
    case 80: return {80, 980};
    case 160: return {160, 1960};
    default:
      throw ConfigError("unsupported channel width " + std::to_string(width_mhz));
  }
}

void PhyParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw ConfigError(std::string("phy.") + name + " must be positive");
  };
  positive(slot_time, "slot_time");
  positive(difs, "difs");
  positive(sifs, "sifs");
  positive(ofdm_symbol, "ofdm_symbol");
  positive(legacy_preamble, "legacy_preamble");
  positive(he_preamble, "he_preamble");
  positive(control_rate, "control_rate");
  positive(t_npca, "t_npca");
  positive(t_switch, "t_switch");
  positive(t_max, "t_max");
  positive(t_collision, "t_collision");
  if (rts_bits <= 0 || cts_bits <= 0 || back_bits <= 0)
    throw ConfigError("phy control frame lengths must be positive");
  if (mac_header_bits < 0 || mpdu_delimiter_bits < 0 || tail_bits < 0)
    throw ConfigError("phy frame overhead bits must be non-negative");
  if (!(per >= 0.0 && per < 1.0)) throw ConfigError("phy.per must be in [0,1)");
  if (ctrl_overhead_override && !(*ctrl_overhead_override > 0))
    throw ConfigError("phy.ctrl_overhead_override must be positive");
}

double dbps(const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss) {
  if (n_ss != 1 && n_ss != 2)
    throw ConfigError("spatial streams must be 1 or 2");
  return width.data_subcarriers * mcs.bits_per_subcarrier.value() * n_ss;
}

long long symbol_count(long long total_bits, const McsProfile& mcs,
                       const ChannelWidthProfile& width, int n_ss) {
  if (n_ss != 1 && n_ss != 2)
    throw ConfigError("spatial streams must be 1 or 2");
  // ceil(bits * den / (subcarriers * num * n_ss)) without rounding drift.
  long long den_bits = total_bits * mcs.bits_per_subcarrier.den;
  long long per_symbol = static_cast<long long>(width.data_subcarriers) *
                         mcs.bits_per_subcarrier.num * n_ss;
  return (den_bits + per_symbol - 1) / per_symbol;
}

double control_overhead(const PhyParams& p) {
  if (p.ctrl_overhead_override) return *p.ctrl_overhead_override;
  double bits = p.rts_bits + p.cts_bits + p.back_bits;
  return 3.0 * p.legacy_preamble + bits / p.control_rate;
}

double data_duration(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss) {
  if (n_packets < 1) throw ConfigError("n_packets must be >= 1");
  long long bits = p.mac_header_bits +
                   n_packets * (p.mpdu_delimiter_bits + payload_bits) + p.tail_bits;
  return p.he_preamble + static_cast<double>(symbol_count(bits, mcs, width, n_ss)) *
                             p.ofdm_symbol;
}

double frame_airtime(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss) {
  return control_overhead(p) + 3.0 * p.sifs +
         data_duration(p, n_packets, payload_bits, mcs, width, n_ss);
}

double txop_duration(const PhyParams& p, long long n_packets, long long payload_bits,
                     const McsProfile& mcs, const ChannelWidthProfile& width, int n_ss) {
  return frame_airtime(p, n_packets, payload_bits, mcs, width, n_ss) + p.difs +
         p.slot_time;
}

long long max_packets_within(const PhyParams& p, double budget, long long payload_bits,
                             const McsProfile& mcs, const ChannelWidthProfile& width,
                             int n_ss, long long delta) {
  if (delta < 1 || delta > 1024)
    throw ConfigError("delta must be in 1..1024, got " + std::to_string(delta));
  if (!(budget > 0)) return 0;
  double fixed = control_overhead(p) + 3.0 * p.sifs + p.difs + p.slot_time +
                 p.he_preamble;
  long long n = 0;
  double symbol_budget = (budget - fixed) / p.ofdm_symbol;
  if (symbol_budget >= 1.0) {
    auto symbols = static_cast<long long>(symbol_budget);
    // Invert the symbol count: most bits that fit, then packets.
    long long per_symbol = static_cast<long long>(width.data_subcarriers) *
                           mcs.bits_per_subcarrier.num * n_ss;
    long long max_bits = symbols * per_symbol / mcs.bits_per_subcarrier.den;
    long long payload_room = max_bits - p.mac_header_bits - p.tail_bits;
    if (payload_room > 0) n = payload_room / (p.mpdu_delimiter_bits + payload_bits);
    n = std::clamp(n, 0LL, delta);
  }
  // The closed form can sit one off the true boundary after the floating-point
  // division above; settle it against txop_duration itself.
  while (n < delta &&
         txop_duration(p, n + 1, payload_bits, mcs, width, n_ss) <= budget)
    ++n;
  while (n >= 1 && txop_duration(p, n, payload_bits, mcs, width, n_ss) > budget)
    --n;
  return n;
}

double npca_budget(const PhyParams& p, double t_obss) {
  if (!(t_obss > 0)) throw ConfigError("t_obss must be positive");
  return std::max(0.0, t_obss - p.t_npca - p.t_switch);
}

double lambda_from_cw(const PhyParams& p, int cw, double alpha) {
  if (cw < 2) throw ConfigError("cw must be >= 2");
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  return alpha * 2.0 / ((cw - 1) * p.slot_time);
}

}  // namespace npca
