#include "npca/band.hpp"

#include <bit>

#include "npca/errors.hpp"

namespace npca {

BandSet BandSet::from_mask(std::uint32_t mask) {
  if (mask >= (1u << 16)) throw ConfigError("band mask uses units above 15");
  return BandSet(mask);
}

BandSet BandSet::block(int first_unit, int n_units) {
  if (first_unit < 0 || n_units <= 0 || first_unit + n_units > 16)
    throw ConfigError("band block out of range");
  std::uint32_t m = ((1u << n_units) - 1u) << first_unit;
  return BandSet(m);
}

int BandSet::unit_count() const { return std::popcount(mask_); }

int BandSet::lowest_unit() const {
  if (mask_ == 0) return -1;
  return std::countr_zero(mask_);
}

bool BandSet::contains(int unit) const {
  if (unit < 0 || unit > 15) return false;
  return (mask_ >> unit) & 1u;
}

bool BandSet::contiguous() const {
  if (mask_ == 0) return false;
  std::uint32_t shifted = mask_ >> std::countr_zero(mask_);
  return (shifted & (shifted + 1)) == 0;
}

bool BandSet::aligned() const {
  if (!contiguous()) return false;
  int n = unit_count();
  if (!std::has_single_bit(static_cast<unsigned>(n))) return false;
  return lowest_unit() % n == 0;
}

std::string BandSet::to_string() const {
  if (mask_ == 0) return "{}";
  int lo = lowest_unit();
  int hi = 31 - std::countl_zero(mask_);
  if (!contiguous()) return "{noncontiguous:" + std::to_string(mask_) + "}";
  if (lo == hi) return std::to_string(lo);
  return std::to_string(lo) + "-" + std::to_string(hi);
}

BandSet widest_idle_subband(BandSet alloc, int primary_unit, BandSet busy) {
  if (!alloc.aligned()) throw ConfigError("allocation must be width-aligned");
  if (!alloc.contains(primary_unit))
    throw ConfigError("primary unit outside allocation");
  for (int size = alloc.unit_count(); size >= 1; size /= 2) {
    BandSet cand = BandSet::block((primary_unit / size) * size, size);
    if (alloc.contains_all(cand) && !cand.overlaps(busy)) return cand;
  }
  return BandSet{};
}

}  // namespace npca
