#pragma once

#include <utility>
#include <vector>

#include "efx/allocation.hpp"

namespace efx {
namespace oracle {

/// Hard limits for brute-force enumeration; exceeding any of them aborts
/// cleanly with BudgetExceededError.
struct OracleBudget {
  int max_agents = 10;
  int max_items = 16;
  long long max_states = 50'000'000;
};

/// Every allocation (each item to an agent or the pool) with at most
/// `max_unallocated` pooled items that is EFX, in canonical order: the
/// assignment vector read item 0 first, assignees ordered agent 0..n-1
/// then the pool.
inline std::vector<Allocation> enumerate_efx(const Profile& p, int max_unallocated,
                                             const OracleBudget& budget = {}) {
  const int n = p.agent_count();
  const int m = p.item_count();
  if (n > budget.max_agents) throw BudgetExceededError("oracle: too many agents");
  if (m > budget.max_items) throw BudgetExceededError("oracle: too many items");
  double states = 1;
  for (int i = 0; i < m; ++i) states *= n + 1;
  if (states > static_cast<double>(budget.max_states))
    throw BudgetExceededError("oracle: state space exceeds budget");

  std::vector<Allocation> out;
  std::vector<int> assign(m, 0);  // 0..n-1 agents, n = pool
  long long visited = 0;
  for (;;) {
    if (++visited > budget.max_states) throw BudgetExceededError("oracle: enumeration budget hit");
    Allocation a;
    a.bundles.assign(n, ItemSet());
    for (int item = 0; item < m; ++item) {
      if (assign[item] == n)
        a.unallocated = a.unallocated.with(item);
      else
        a.bundles[assign[item]] = a.bundles[assign[item]].with(item);
    }
    if (a.unallocated.size() <= max_unallocated && is_efx(p, a)) out.push_back(std::move(a));
    int pos = m - 1;
    while (pos >= 0 && assign[pos] == n) assign[pos--] = 0;
    if (pos < 0) break;
    ++assign[pos];
  }
  return out;
}

/// All valid (agent, kept subset) pairs for a set S: the agent envies the
/// subset and nobody strongly envies it. Sorted by agent, then bitmask.
inline std::vector<std::pair<int, ItemSet>> enumerate_most_envious(const Profile& p,
                                                                   const Allocation& a,
                                                                   ItemSet s) {
  if (s.size() > 16) throw BudgetExceededError("enumerate_most_envious: set too large");
  const int n = p.agent_count();
  std::vector<std::pair<int, ItemSet>> out;
  const std::uint64_t sb = s.bits();
  for (std::uint64_t t = sb;;) {
    if (t != 0) {
      ItemSet kept = ItemSet::of_bits(t);
      bool safe = true;
      for (int q = 0; q < n && safe; ++q)
        if (strongly_envies(p, a, q, kept)) safe = false;
      if (safe)
        for (int q = 0; q < n; ++q)
          if (envies(p, a, q, kept)) out.emplace_back(q, kept);
    }
    if (t == 0) break;
    t = (t - 1) & sb;
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second.bits() < y.second.bits();
  });
  return out;
}

/// Key-maximal k-subset of `t` by plain enumeration.
inline ItemSet max_subset_of_size(const Valuation& v, ItemSet t, int k) {
  if (t.size() > 12) throw BudgetExceededError("max_subset_of_size: set too large");
  if (k < 0 || k > t.size()) throw ArgumentError("max_subset_of_size: k out of range");
  ItemSet best;
  bool have = false;
  const std::uint64_t tb = t.bits();
  for (std::uint64_t x = tb;;) {
    ItemSet cand = ItemSet::of_bits(x);
    if (cand.size() == k && (!have || v.cmp(cand, best) > 0)) {
      best = cand;
      have = true;
    }
    if (x == 0) break;
    x = (x - 1) & tb;
  }
  return best;
}

inline ItemSet max_subset_of_size(const ValuationDescriptor& d, ItemSet t, int k) {
  return max_subset_of_size(Valuation(d), t, k);
}

}  // namespace oracle
}  // namespace efx
