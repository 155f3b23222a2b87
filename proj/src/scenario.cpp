#include "npca/scenario.hpp"

#include <set>

#include "npca/errors.hpp"

namespace npca {

McsProfile BssSpec::mcs() const {
  if (mcs_index) return mcs_profile(*mcs_index);
  if (distance_m) return mcs_from_distance(*distance_m);
  throw ConfigError("bss " + id + ": neither mcs nor distance set");
}

BandSet BssSpec::primary_half() const {
  int n = allocation.unit_count();
  if (n == 1) return allocation;
  int half = n / 2;
  return BandSet::block((primary_unit / half) * half, half);
}

BandSet BssSpec::npca_band() const {
  if (allocation.unit_count() == 1) return BandSet{};
  return allocation.minus(primary_half());
}

void BssSpec::check(
    const std::function<void(const std::string&, const std::string&)>& fail)
    const {
  if (id.empty()) fail("id", "must be non-empty");
  if (allocation.empty()) {
    fail("allocation", "must be non-empty");
    return;  // the remaining checks presume some allocation
  }
  if (!allocation.aligned())
    fail("allocation", "must be contiguous and width-aligned");
  if (!allocation.contains(primary_unit))
    fail("primary_unit", "must lie inside the allocation");
  if (delta < 1 || delta > 1024) fail("delta", "must be in 1..1024");
  if (cw_min < 2) fail("cw_min", "must be >= 2");
  if (cw_max < cw_min) fail("cw_max", "must be >= cw_min");
  if (!(alpha > 0)) fail("alpha", "must be positive");
  if (n_ss != 1 && n_ss != 2) fail("n_ss", "must be 1 or 2");
  if (payload_bits <= 0) fail("payload_bits", "must be positive");
  if (mcs_index && (*mcs_index < 1 || *mcs_index > 11))
    fail("mcs", "must be in 1..11");
  if (distance_m && !(*distance_m > 0)) fail("distance_m", "must be positive");
  if (!mcs_index && !distance_m) fail("mcs", "or distance_m must be set");
  if (npca_enabled && allocation.unit_count() < 2)
    fail("npca", "needs an allocation of at least two units");
  // Widths are produced later via width_profile; reject sizes it cannot map.
  int units = allocation.unit_count();
  if (units != 1 && units != 2 && units != 4 && units != 8)
    fail("allocation", "must span 1, 2, 4 or 8 units");
}

void BssSpec::validate() const {
  check([this](const std::string& field, const std::string& msg) {
    if (field == "id") throw ConfigError("bss id must be non-empty");
    throw ConfigError("bss " + id + ": " + field + " " + msg);
  });
}

void Scenario::validate() const {
  if (bsses.empty()) throw ConfigError("scenario needs at least one bss");
  phy.validate();
  std::set<std::string> seen;
  for (const auto& b : bsses) {
    b.validate();
    if (!seen.insert(b.id).second)
      throw ConfigError("duplicate bss id " + b.id);
  }
}

int Scenario::index_of(const std::string& bss_id) const {
  for (size_t i = 0; i < bsses.size(); ++i)
    if (bsses[i].id == bss_id) return static_cast<int>(i);
  return -1;
}

}  // namespace npca
