#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace npca {

// A set of basic 20 MHz channel units, indices 0..15, kept as a bitmask.
// Bands attached to allocations or transmissions must be contiguous and
// width-aligned (dyadic channelization: 1, 2, 4 or 8 units starting at a
// multiple of their own size).
class BandSet {
public:
  constexpr BandSet() = default;

  static BandSet from_mask(std::uint32_t mask);
  // n_units consecutive units starting at first_unit.
  static BandSet block(int first_unit, int n_units);

  bool empty() const { return mask_ == 0; }
  int unit_count() const;
  int lowest_unit() const;  // -1 when empty
  int width_mhz() const { return 20 * unit_count(); }
  std::uint32_t mask() const { return mask_; }

  bool contains(int unit) const;
  bool contains_all(BandSet other) const {
    return (other.mask_ & ~mask_) == 0;
  }
  bool overlaps(BandSet other) const { return (mask_ & other.mask_) != 0; }
  BandSet unioned(BandSet other) const { return BandSet(mask_ | other.mask_); }
  BandSet minus(BandSet other) const { return BandSet(mask_ & ~other.mask_); }

  bool contiguous() const;
  // Contiguous, power-of-two unit count, start aligned to that count.
  bool aligned() const;

  std::string to_string() const;  // "4-7", "0", "{}"

  friend auto operator<=>(BandSet a, BandSet b) = default;

private:
  constexpr explicit BandSet(std::uint32_t m) : mask_(m) {}
  std::uint32_t mask_ = 0;
};

// The widest idle, aligned, contiguous sub-band of alloc that contains
// primary_unit. Empty when primary_unit itself is busy. alloc must be aligned.
BandSet widest_idle_subband(BandSet alloc, int primary_unit, BandSet busy);

}  // namespace npca
