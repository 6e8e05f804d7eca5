#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "efx/errors.hpp"

namespace efx {

/// Densest possible set-of-items representation. Items are indices
/// 0..m-1 with m <= 62; iteration is always in ascending item order.
class ItemSet {
 public:
  static constexpr int kMaxItems = 62;

  constexpr ItemSet() = default;

  static constexpr ItemSet of_bits(std::uint64_t bits) {
    ItemSet s;
    s.bits_ = bits;
    return s;
  }

  static ItemSet single(int item) { return of_bits(std::uint64_t{1} << check(item)); }

  static ItemSet full(int m) {
    if (m < 0 || m > kMaxItems) throw ArgumentError("ItemSet: item count out of range");
    return of_bits(m == 0 ? 0 : ((std::uint64_t{1} << m) - 1));
  }

  ItemSet(std::initializer_list<int> items) {
    for (int i : items) bits_ |= std::uint64_t{1} << check(i);
  }

  static ItemSet from_items(const std::vector<int>& items) {
    ItemSet s;
    for (int i : items) s.bits_ |= std::uint64_t{1} << check(i);
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }

  constexpr bool contains(int item) const { return (bits_ >> item) & 1; }
  constexpr bool subset_of(ItemSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(ItemSet other) const { return (bits_ & other.bits_) != 0; }

  constexpr ItemSet with(int item) const { return of_bits(bits_ | (std::uint64_t{1} << item)); }
  constexpr ItemSet without(int item) const { return of_bits(bits_ & ~(std::uint64_t{1} << item)); }

  friend constexpr ItemSet operator|(ItemSet a, ItemSet b) { return of_bits(a.bits_ | b.bits_); }
  friend constexpr ItemSet operator&(ItemSet a, ItemSet b) { return of_bits(a.bits_ & b.bits_); }
  friend constexpr ItemSet operator-(ItemSet a, ItemSet b) { return of_bits(a.bits_ & ~b.bits_); }

  friend constexpr bool operator==(ItemSet a, ItemSet b) { return a.bits_ == b.bits_; }
  friend constexpr bool operator!=(ItemSet a, ItemSet b) { return a.bits_ != b.bits_; }
  /// Order by bitmask value; used only for canonical/deterministic sorting.
  friend constexpr bool operator<(ItemSet a, ItemSet b) { return a.bits_ < b.bits_; }

  /// Lowest item index, -1 when empty.
  constexpr int lowest() const { return bits_ == 0 ? -1 : std::countr_zero(bits_); }

  class iterator {
   public:
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
    constexpr int operator*() const { return std::countr_zero(rest_); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr bool operator!=(const iterator& other) const { return rest_ != other.rest_; }

   private:
    std::uint64_t rest_;
  };

  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  std::vector<int> items() const {
    std::vector<int> out;
    out.reserve(size());
    for (int i : *this) out.push_back(i);
    return out;
  }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (int i : *this) {
      if (!first) out += ",";
      out += std::to_string(i);
      first = false;
    }
    return out + "}";
  }

 private:
  static int check(int item) {
    if (item < 0 || item >= kMaxItems) throw ArgumentError("ItemSet: item index out of range");
    return item;
  }

  std::uint64_t bits_ = 0;
};

}  // namespace efx
