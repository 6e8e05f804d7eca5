#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "efx/errors.hpp"
#include "efx/itemset.hpp"

namespace efx {

/// Exact integer value of a bundle. Sums, caps, maxima and products of
/// item values stay exact at any magnitude.
using Value = boost::multiprecision::cpp_int;

enum class ValuationKind { additive, unit_demand, budget_additive, multiplicative, table };

inline std::string to_string(ValuationKind k) {
  switch (k) {
    case ValuationKind::additive: return "additive";
    case ValuationKind::unit_demand: return "unit_demand";
    case ValuationKind::budget_additive: return "budget_additive";
    case ValuationKind::multiplicative: return "multiplicative";
    case ValuationKind::table: return "table";
  }
  return "?";
}

/// Raw, serializable description of one agent's valuation.
///
/// For the parametric kinds `item_values` has one entry per item. For the
/// table kind `item_values` holds all 2^m bundle values indexed by bitmask.
struct ValuationDescriptor {
  ValuationKind kind = ValuationKind::additive;
  std::vector<std::int64_t> item_values;
  std::int64_t budget = 0;  // budget_additive only

  friend bool operator==(const ValuationDescriptor& a, const ValuationDescriptor& b) {
    return a.kind == b.kind && a.item_values == b.item_values &&
           (a.kind != ValuationKind::budget_additive || a.budget == b.budget);
  }
};

inline ValuationDescriptor additive(std::vector<std::int64_t> values) {
  return ValuationDescriptor{ValuationKind::additive, std::move(values), 0};
}
inline ValuationDescriptor unit_demand(std::vector<std::int64_t> values) {
  return ValuationDescriptor{ValuationKind::unit_demand, std::move(values), 0};
}
inline ValuationDescriptor budget_additive(std::vector<std::int64_t> values, std::int64_t budget) {
  return ValuationDescriptor{ValuationKind::budget_additive, std::move(values), budget};
}
inline ValuationDescriptor multiplicative(std::vector<std::int64_t> values) {
  return ValuationDescriptor{ValuationKind::multiplicative, std::move(values), 0};
}
inline ValuationDescriptor table_valuation(std::vector<std::int64_t> bundle_values) {
  return ValuationDescriptor{ValuationKind::table, std::move(bundle_values), 0};
}

/// Number of items a descriptor is defined over.
inline int descriptor_items(const ValuationDescriptor& d) {
  if (d.kind != ValuationKind::table) return static_cast<int>(d.item_values.size());
  std::size_t n = d.item_values.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw MalformedInstanceError("table valuation: entry count must be a power of two");
  return std::countr_zero(n);
}

/// Structural checks only (sizes, sign constraints, table monotonicity).
inline void validate_descriptor(const ValuationDescriptor& d, int m) {
  if (m < 0 || m > ItemSet::kMaxItems) throw MalformedInstanceError("item count out of range");
  if (descriptor_items(d) != m)
    throw MalformedInstanceError("descriptor size does not match item count: expected " +
                                 std::to_string(m) + " items");
  for (std::int64_t v : d.item_values) {
    if (v < 0) throw MalformedInstanceError("item values must be nonnegative");
  }
  switch (d.kind) {
    case ValuationKind::multiplicative:
      for (std::int64_t v : d.item_values)
        if (v < 1) throw MalformedInstanceError("multiplicative valuation: item values must be >= 1");
      break;
    case ValuationKind::budget_additive:
      if (d.budget <= 0) throw MalformedInstanceError("budget_additive valuation: budget must be positive");
      break;
    case ValuationKind::table: {
      if (m > 25) throw CapacityError("table valuation too large");
      if (d.item_values[0] != 0) throw MalformedInstanceError("table valuation: value of empty bundle must be 0");
      const auto& t = d.item_values;
      for (std::uint64_t s = 0; s < t.size(); ++s) {
        for (int i = 0; i < m; ++i) {
          if (!((s >> i) & 1) && t[s | (std::uint64_t{1} << i)] < t[s])
            throw MalformedInstanceError("table valuation: not monotone at item " + std::to_string(i));
        }
      }
      break;
    }
    default:
      break;
  }
}

/// Base value of a bundle under a descriptor. Works for any descriptor,
/// including tables that admit no comparison proxy.
inline Value value(const ValuationDescriptor& d, ItemSet s) {
  switch (d.kind) {
    case ValuationKind::additive: {
      Value sum = 0;
      for (int i : s) sum += d.item_values[i];
      return sum;
    }
    case ValuationKind::budget_additive: {
      Value sum = 0;
      for (int i : s) sum += d.item_values[i];
      return sum > d.budget ? Value(d.budget) : sum;
    }
    case ValuationKind::unit_demand: {
      std::int64_t best = 0;
      for (int i : s) best = std::max(best, d.item_values[i]);
      return Value(best);
    }
    case ValuationKind::multiplicative: {
      if (s.empty()) return Value(0);
      Value prod = 1;
      for (int i : s) prod *= d.item_values[i];
      return prod;
    }
    case ValuationKind::table:
      if (s.bits() >= d.item_values.size())
        throw MalformedInstanceError("table valuation: missing entry for bundle");
      return Value(d.item_values[s.bits()]);
  }
  throw ArgumentError("unknown valuation kind");
}

/// Total-order comparison key for bundles.
///
/// `primary` is the class-specific exact magnitude (see Valuation);
/// `tiebreak` is the bit-weight sum over the canonical item permutation.
/// Keys compare lexicographically and are never equal for distinct bundles.
struct BundleKey {
  Value primary;
  std::uint64_t tiebreak = 0;

  friend bool operator==(const BundleKey& a, const BundleKey& b) {
    return a.tiebreak == b.tiebreak && a.primary == b.primary;
  }
  friend bool operator<(const BundleKey& a, const BundleKey& b) {
    if (a.primary != b.primary) return a.primary < b.primary;
    return a.tiebreak < b.tiebreak;
  }
  friend bool operator>(const BundleKey& a, const BundleKey& b) { return b < a; }
  friend bool operator<=(const BundleKey& a, const BundleKey& b) { return !(b < a); }
  friend bool operator>=(const BundleKey& a, const BundleKey& b) { return !(a < b); }
};

enum class Ordering { less, greater };

/// A descriptor prepared for comparisons: canonical item permutation,
/// proxy key, and (for small m) full per-bundle rank tables that make the
/// hot predicates integer lookups.
///
/// Key construction per class:
///  - additive and budget-additive order by the *uncapped* item sum, then
///    the tiebreak. The capped value itself is not cancelable once ties
///    are broken (two capped bundles with unequal uncapped sums break the
///    implication), so budget-additive routes through its underlying
///    additive valuation.
///  - unit-demand and multiplicative order by (base value, tiebreak).
///  - tables are accepted only when already non-degenerate and cancelable;
///    the tiebreak is then never consulted.
class Valuation {
 public:
  static constexpr int kTableMaxItems = 16;

  explicit Valuation(ValuationDescriptor desc) : desc_(std::move(desc)) {
    m_ = descriptor_items(desc_);
    validate_descriptor(desc_, m_);
    build_ranks();
    if (desc_.kind == ValuationKind::table) check_table_usable();
    if (m_ <= kTableMaxItems) build_tables();
  }

  const ValuationDescriptor& descriptor() const { return desc_; }
  ValuationKind kind() const { return desc_.kind; }
  int item_count() const { return m_; }

  /// Position of `item` in the canonical permutation (ascending singleton
  /// value, ties by ascending index).
  int rank_of_item(int item) const { return pi_[item]; }

  std::uint64_t tiebreak(ItemSet s) const {
    std::uint64_t t = 0;
    for (int i : s) t |= std::uint64_t{1} << pi_[i];
    return t;
  }

  Value value(ItemSet s) const { return efx::value(desc_, s); }

  BundleKey key(ItemSet s) const {
    if (!prim_.empty()) return BundleKey{prim_[s.bits()], tiebreak(s)};
    return BundleKey{primary(s), tiebreak(s)};
  }

  /// -1, 0, +1 comparison of the two bundles' keys. Zero only for a == b.
  int cmp(ItemSet a, ItemSet b) const {
    if (a == b) return 0;
    if (!rank_.empty()) {
      std::uint32_t ra = rank_[a.bits()], rb = rank_[b.bits()];
      return ra < rb ? -1 : 1;
    }
    BundleKey ka = key(a), kb = key(b);
    return ka < kb ? -1 : 1;
  }

  bool prefers(ItemSet a, ItemSet b) const { return cmp(a, b) > 0; }

  /// Key-rank of a bundle among all 2^m bundles (small m only).
  std::uint32_t rank(ItemSet s) const { return rank_[s.bits()]; }
  bool has_tables() const { return !rank_.empty(); }

  /// Highest key reachable by dropping one item of `s`; requires tables.
  std::uint32_t max_single_drop_rank(ItemSet s) const { return maxdrop_[s.bits()]; }

  /// Item whose removal leaves the key-maximal remainder (the item of
  /// least marginal contribution). Requires a nonempty set.
  int best_removal(ItemSet s) const {
    if (s.empty()) throw ArgumentError("best_removal: empty set");
    int best = -1;
    ItemSet best_rest;
    for (int h : s) {
      ItemSet rest = s.without(h);
      if (best < 0 || cmp(rest, best_rest) > 0) {
        best = h;
        best_rest = rest;
      }
    }
    return best;
  }

 private:
  Value primary(ItemSet s) const {
    switch (desc_.kind) {
      case ValuationKind::additive:
      case ValuationKind::budget_additive: {
        Value sum = 0;
        for (int i : s) sum += desc_.item_values[i];
        return sum;
      }
      case ValuationKind::unit_demand: {
        std::int64_t best = 0;
        for (int i : s) best = std::max(best, desc_.item_values[i]);
        return Value(best);
      }
      case ValuationKind::multiplicative: {
        if (s.empty()) return Value(0);
        Value prod = 1;
        for (int i : s) prod *= desc_.item_values[i];
        return prod;
      }
      case ValuationKind::table:
        return Value(desc_.item_values[s.bits()]);
    }
    throw ArgumentError("unknown valuation kind");
  }

  void build_ranks() {
    std::vector<std::int64_t> singleton(m_);
    for (int i = 0; i < m_; ++i)
      singleton[i] = desc_.kind == ValuationKind::table ? desc_.item_values[std::uint64_t{1} << i]
                                                        : desc_.item_values[i];
    std::vector<int> order(m_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return singleton[a] < singleton[b]; });
    pi_.assign(m_, 0);
    for (int pos = 0; pos < m_; ++pos) pi_[order[pos]] = pos;
  }

  void check_table_usable() const {
    if (m_ > 12)
      throw UnsupportedValuationError("table valuation: verification cap is 12 items");
    const auto& t = desc_.item_values;
    std::vector<std::int64_t> sorted(t);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw UnsupportedValuationError(
          "table valuation is degenerate (two bundles share a value); no comparison proxy exists");
    const std::uint64_t n = t.size();
    for (int g = 0; g < m_; ++g) {
      const std::uint64_t gb = std::uint64_t{1} << g;
      for (std::uint64_t s = 0; s < n; ++s) {
        if (s & gb) continue;
        for (std::uint64_t u = 0; u < n; ++u) {
          if (u & gb) continue;
          if (t[s | gb] > t[u | gb] && t[s] <= t[u])
            throw UnsupportedValuationError("table valuation is not cancelable");
        }
      }
    }
  }

  void build_tables() {
    const std::uint64_t n = std::uint64_t{1} << m_;
    prim_.resize(n);
    tb_.resize(n);
    prim_[0] = primary(ItemSet());
    tb_[0] = 0;
    for (std::uint64_t s = 1; s < n; ++s) {
      const int low = std::countr_zero(s);
      const std::uint64_t rest = s & (s - 1);
      tb_[s] = tb_[rest] | (std::uint64_t{1} << pi_[low]);
      switch (desc_.kind) {
        case ValuationKind::additive:
        case ValuationKind::budget_additive:
          prim_[s] = prim_[rest] + desc_.item_values[low];
          break;
        case ValuationKind::unit_demand:
          prim_[s] = std::max(prim_[rest], Value(desc_.item_values[low]));
          break;
        case ValuationKind::multiplicative:
          prim_[s] = rest == 0 ? Value(desc_.item_values[low]) : Value(prim_[rest] * desc_.item_values[low]);
          break;
        case ValuationKind::table:
          prim_[s] = desc_.item_values[s];
          break;
      }
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (prim_[a] != prim_[b]) return prim_[a] < prim_[b];
      return tb_[a] < tb_[b];
    });
    rank_.resize(n);
    for (std::uint64_t pos = 0; pos < n; ++pos) rank_[order[pos]] = static_cast<std::uint32_t>(pos);
    maxdrop_.assign(n, 0);
    for (std::uint64_t s = 1; s < n; ++s) {
      std::uint32_t best = 0;
      for (std::uint64_t rest = s; rest;) {
        const std::uint64_t bit = rest & (0 - rest);
        best = std::max(best, rank_[s & ~bit]);
        rest ^= bit;
      }
      maxdrop_[s] = best;
    }
  }

  ValuationDescriptor desc_;
  int m_ = 0;
  std::vector<int> pi_;
  std::vector<Value> prim_;
  std::vector<std::uint64_t> tb_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> maxdrop_;
};

/// Strict comparison of two distinct bundles under a descriptor's proxy key.
inline Ordering compare(const ValuationDescriptor& d, ItemSet s, ItemSet t) {
  if (s == t) throw ArgumentError("compare: bundles must be distinct");
  Valuation v(d);
  return v.cmp(s, t) > 0 ? Ordering::greater : Ordering::less;
}

/// Exhaustive cancelability check of the *base* valuation:
/// v(S + g) > v(T + g) must imply v(S) > v(T) for every S, T, g outside both.
inline bool check_cancelable(const ValuationDescriptor& d, int m) {
  if (descriptor_items(d) != m) throw ArgumentError("check_cancelable: item count mismatch");
  if (m > 12) throw CapacityError("check_cancelable: exhaustive check capped at 12 items");
  validate_descriptor(d, m);
  const std::uint64_t n = std::uint64_t{1} << m;
  std::vector<Value> val(n);
  for (std::uint64_t s = 0; s < n; ++s) val[s] = value(d, ItemSet::of_bits(s));

  bool fits = true;
  for (const Value& v : val)
    if (v > std::numeric_limits<std::int64_t>::max()) fits = false;

  auto run = [&](auto& vv) {
    for (int g = 0; g < m; ++g) {
      const std::uint64_t gb = std::uint64_t{1} << g;
      for (std::uint64_t s = 0; s < n; ++s) {
        if (s & gb) continue;
        for (std::uint64_t t = 0; t < n; ++t) {
          if (t & gb) continue;
          if (vv[s | gb] > vv[t | gb] && vv[s] <= vv[t]) return false;
        }
      }
    }
    return true;
  };

  if (fits) {
    std::vector<std::int64_t> fast(n);
    for (std::uint64_t s = 0; s < n; ++s) fast[s] = static_cast<std::int64_t>(val[s]);
    return run(fast);
  }
  return run(val);
}

/// Keep deleting the least-marginal item until `k` remain. The result is
/// the key-maximal k-subset of `t`.
inline ItemSet trim_to_size(const Valuation& v, ItemSet t, int k) {
  if (k < 0 || k > t.size()) throw ArgumentError("trim_to_size: k out of range");
  ItemSet z = t;
  while (z.size() > k) z = z.without(v.best_removal(z));
  return z;
}

/// Keep deleting the least-marginal item while the remainder still beats
/// `floor`; returns the smallest-cardinality bundle in the removal
/// sequence exceeding `floor` (a minimum-cardinality subset of `t` doing so).
inline ItemSet trim_until(const Valuation& v, ItemSet t, const BundleKey& floor) {
  if (!(v.key(t) > floor)) throw PreconditionError("trim_until: key(t) must exceed floor");
  ItemSet z = t;
  while (!z.empty()) {
    ItemSet next = z.without(v.best_removal(z));
    if (!(v.key(next) > floor)) break;
    z = next;
  }
  return z;
}

inline ItemSet trim_to_size(const ValuationDescriptor& d, ItemSet t, int k) {
  return trim_to_size(Valuation(d), t, k);
}
inline ItemSet trim_until(const ValuationDescriptor& d, ItemSet t, const BundleKey& floor) {
  return trim_until(Valuation(d), t, floor);
}

}  // namespace efx
