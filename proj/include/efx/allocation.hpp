#pragma once

#include <optional>
#include <string>
#include <vector>

#include "efx/instance.hpp"

namespace efx {

/// Disjoint bundles, one per agent, plus the pool of unallocated items.
/// Bundles and pool always partition the item universe.
struct Allocation {
  std::vector<ItemSet> bundles;
  ItemSet unallocated;

  static Allocation all_unallocated(const Profile& p) {
    Allocation a;
    a.bundles.assign(p.agent_count(), ItemSet());
    a.unallocated = p.universe();
    return a;
  }

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.bundles == b.bundles && a.unallocated == b.unallocated;
  }
};

inline void validate_allocation(const Profile& p, const Allocation& a) {
  if (static_cast<int>(a.bundles.size()) != p.agent_count())
    throw ArgumentError("allocation: bundle count does not match agent count");
  ItemSet seen = a.unallocated;
  for (const ItemSet& b : a.bundles) {
    if (b.intersects(seen)) throw ArgumentError("allocation: bundles are not disjoint");
    seen = seen | b;
  }
  if (seen != p.universe()) throw ArgumentError("allocation: bundles and pool do not cover all items");
}

/// Agent i envies a set S when S beats i's own bundle under i's key.
inline bool envies(const Profile& p, const Allocation& a, int agent, ItemSet s) {
  return p.val(agent).prefers(s, a.bundles[agent]);
}

/// Strong envy: some single-item removal from S still leaves a set i envies.
inline bool strongly_envies(const Profile& p, const Allocation& a, int agent, ItemSet s) {
  if (s.empty()) return false;
  const Valuation& v = p.val(agent);
  if (v.has_tables()) return v.max_single_drop_rank(s) > v.rank(a.bundles[agent]);
  return envies(p, a, agent, s.without(v.best_removal(s)));
}

inline bool envies_agent(const Profile& p, const Allocation& a, int i, int j) {
  return envies(p, a, i, a.bundles[j]);
}

inline bool is_ef(const Profile& p, const Allocation& a) {
  for (int i = 0; i < p.agent_count(); ++i)
    for (int j = 0; j < p.agent_count(); ++j)
      if (i != j && envies_agent(p, a, i, j)) return false;
  return true;
}

inline bool is_efx(const Profile& p, const Allocation& a) {
  for (int i = 0; i < p.agent_count(); ++i)
    for (int j = 0; j < p.agent_count(); ++j)
      if (i != j && strongly_envies(p, a, i, a.bundles[j])) return false;
  return true;
}

/// Some agent that envies a subset T of S that nobody strongly envies,
/// together with that subset and the discarded remainder S \ T.
struct MostEnviousResult {
  int agent = -1;
  ItemSet envied_subset;
  ItemSet discard;
};

/// Deterministic most-envious construction: starting from S, repeatedly
/// take the lowest (agent, item) witness of strong envy and drop that
/// item, until no agent strongly envies the remainder. Returns nothing
/// iff no agent envies S at all.
inline std::optional<MostEnviousResult> most_envious(const Profile& p, const Allocation& a,
                                                     ItemSet s) {
  const int n = p.agent_count();
  auto first_envier = [&](ItemSet z) {
    for (int i = 0; i < n; ++i)
      if (envies(p, a, i, z)) return i;
    return -1;
  };
  if (first_envier(s) < 0) return std::nullopt;
  ItemSet z = s;
  for (;;) {
    bool shrunk = false;
    for (int i = 0; i < n && !shrunk; ++i) {
      if (!strongly_envies(p, a, i, z)) continue;
      for (int h : z) {
        if (envies(p, a, i, z.without(h))) {
          z = z.without(h);
          shrunk = true;
          break;
        }
      }
    }
    if (!shrunk) break;
  }
  int agent = first_envier(z);
  if (agent < 0) throw InvariantViolationError("most_envious: removal loop lost every envier");
  return MostEnviousResult{agent, z, s - z};
}

/// Lexicographic progress measure: under `ordering`, the first agent whose
/// bundle key changes must strictly improve. Key equality stands in for
/// the usual value tie; with non-degenerate keys it coincides with bundle
/// identity.
inline bool dominates(const Profile& p, const Allocation& after, const Allocation& before,
                      const AgentOrdering& ordering) {
  for (int agent : ordering) {
    int c = p.val(agent).cmp(after.bundles[agent], before.bundles[agent]);
    if (c != 0) return c > 0;
  }
  return false;
}

inline bool pareto_dominates(const Profile& p, const Allocation& after, const Allocation& before) {
  bool strict = false;
  for (int i = 0; i < p.agent_count(); ++i) {
    int c = p.val(i).cmp(after.bundles[i], before.bundles[i]);
    if (c < 0) return false;
    if (c > 0) strict = true;
  }
  return strict;
}

/// If some agent envies the unallocated pool, hand the smallest envied
/// subset of it (over all agents; ties to the lowest agent) to that agent
/// and return the old bundle to the pool. Preserves EFX and strictly
/// improves exactly one agent.
inline std::optional<Allocation> charity_fix(const Profile& p, const Allocation& a) {
  const int n = p.agent_count();
  int best_agent = -1;
  ItemSet best_subset;
  for (int i = 0; i < n; ++i) {
    if (!envies(p, a, i, a.unallocated)) continue;
    ItemSet t = trim_until(p.val(i), a.unallocated, p.val(i).key(a.bundles[i]));
    if (best_agent < 0 || t.size() < best_subset.size()) {
      best_agent = i;
      best_subset = t;
    }
  }
  if (best_agent < 0) return std::nullopt;
  Allocation out = a;
  out.unallocated = (a.unallocated - best_subset) | a.bundles[best_agent];
  out.bundles[best_agent] = best_subset;
  if (!pareto_dominates(p, out, a))
    throw InvariantViolationError("charity_fix: result does not Pareto-dominate input");
  if (is_efx(p, a) && !is_efx(p, out))
    throw InvariantViolationError("charity_fix: EFX input produced a non-EFX result");
  return out;
}

}  // namespace efx
