#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "efx/champion.hpp"

namespace efx {

/// A set of champion edges forming vertex-disjoint cycles whose added
/// sets are pairwise disjoint and each either unallocated or released
/// (covered by some member edge's freed | discard). Applying it yields a
/// Pareto-dominating EFX allocation.
struct PIEdgeSet {
  std::vector<ChampionEdge> edges;
};

inline bool check_pi_conditions(const Profile& p, const Allocation& a,
                                const std::vector<ChampionEdge>& edges,
                                std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (edges.empty()) return fail("empty edge set");
  std::uint32_t sources = 0, targets = 0;
  for (const ChampionEdge& e : edges) {
    if (e.source < 0 || e.source >= p.agent_count() || e.target < 0 ||
        e.target >= p.agent_count())
      return fail("agent index out of range");
    if (!e.freed.subset_of(a.bundles[e.target])) return fail("freed set leaves the target bundle");
    if (e.added.intersects(a.bundles[e.target])) return fail("added set meets the target bundle");
    if (!e.discard.subset_of(e.claimed(a))) return fail("discard leaves the claimed set");
    if (!p.val(e.source).prefers(e.kept(a), a.bundles[e.source]))
      return fail("source does not envy its kept set");
    if ((sources >> e.source) & 1) return fail("duplicate source");
    if ((targets >> e.target) & 1) return fail("duplicate target");
    sources |= 1u << e.source;
    targets |= 1u << e.target;
  }
  if (sources != targets) return fail("edges do not close into cycles");
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j)
      if (edges[i].added.intersects(edges[j].added)) return fail("added sets overlap");
  for (const ChampionEdge& e : edges) {
    if (e.added.subset_of(a.unallocated)) continue;
    bool released = false;
    for (const ChampionEdge& l : edges)
      if (e.added.subset_of(l.freed | l.discard)) {
        released = true;
        break;
      }
    if (!released) return fail("added set neither unallocated nor released");
  }
  return true;
}

/// Reallocates along the edge set: each source takes its kept set, every
/// displaced or discarded item returns to the pool. The result is
/// re-verified (EFX, Pareto domination, strict gain on every cycle agent)
/// rather than trusted.
inline Allocation apply_pi(const Profile& p, const Allocation& a, const PIEdgeSet& pi,
                           CheckStats* stats = nullptr) {
  std::string why;
  if (!check_pi_conditions(p, a, pi.edges, &why))
    throw ArgumentError("apply_pi: invalid edge set: " + why);
  Allocation out = a;
  for (const ChampionEdge& e : pi.edges) out.bundles[e.source] = e.kept(a);
  ItemSet used;
  for (const ItemSet& b : out.bundles) {
    if (b.intersects(used))
      throw InvariantViolationError("apply_pi: reallocated bundles overlap");
    used = used | b;
  }
  out.unallocated = p.universe() - used;
  for (const ChampionEdge& e : pi.edges)
    if (p.val(e.source).cmp(out.bundles[e.source], a.bundles[e.source]) <= 0)
      throw InvariantViolationError("apply_pi: a cycle agent failed to strictly improve");
  if (!pareto_dominates(p, out, a))
    throw InvariantViolationError("apply_pi: result does not Pareto-dominate the input");
  if (!is_efx(p, out)) throw InvariantViolationError("apply_pi: result is not EFX");
  if (stats) stats->pi_applications++;
  return out;
}

struct PiSearchCaps {
  int max_cycles = 3;
  int max_total_edges = -1;  // -1: twice the agent count
  long long max_candidate_sets = 4'000'000;
  long long max_single_cycles = 100'000;
};

struct PiSearchResult {
  std::optional<PIEdgeSet> found;
  bool exhausted = true;  // false when a cap stopped the enumeration early
};

/// Deterministic search for a valid PI edge set over the candidate edges:
/// every single cycle (vertex walks with parallel edges expanded), then
/// vertex-disjoint unions of up to max_cycles of them, tried in order of
/// total edge count, then lexicographic edge ids. Returns the first set
/// passing the PI conditions whose sources cover `required_sources`.
inline PiSearchResult find_pi_edge_set(const Profile& p, const Allocation& a,
                                       std::vector<ChampionEdge> candidates,
                                       PiSearchCaps caps = {},
                                       std::uint32_t required_sources = 0) {
  PiSearchResult res;
  const int n = p.agent_count();
  if (caps.max_total_edges < 0) caps.max_total_edges = 2 * n;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::vector<std::vector<int>>> by_pair(n, std::vector<std::vector<int>>(n));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    by_pair[candidates[i].source][candidates[i].target].push_back(static_cast<int>(i));

  struct Cyc {
    std::vector<int> ids;  // ascending candidate indices
    std::uint32_t vmask = 0;
  };
  std::vector<Cyc> singles;
  bool truncated = false;

  std::vector<int> hop_ids;
  auto expand = [&](auto&& self, const std::vector<int>& verts, std::size_t hop) -> void {
    if (truncated) return;
    if (hop == verts.size()) {
      if (static_cast<long long>(singles.size()) >= caps.max_single_cycles) {
        truncated = true;
        return;
      }
      Cyc c;
      c.ids = hop_ids;
      std::sort(c.ids.begin(), c.ids.end());
      for (int v : verts) c.vmask |= 1u << v;
      singles.push_back(std::move(c));
      return;
    }
    int u = verts[hop], v = verts[(hop + 1) % verts.size()];
    for (int id : by_pair[u][v]) {
      hop_ids.push_back(id);
      self(self, verts, hop + 1);
      hop_ids.pop_back();
    }
  };

  std::vector<int> path;
  std::vector<bool> onpath(n, false);
  auto walk = [&](auto&& self, int start, int u) -> void {
    if (truncated) return;
    if (!by_pair[u][start].empty() && static_cast<int>(path.size()) <= caps.max_total_edges)
      expand(expand, path, 0);
    if (static_cast<int>(path.size()) >= caps.max_total_edges) return;
    for (int v = start + 1; v < n; ++v) {
      if (onpath[v] || by_pair[u][v].empty()) continue;
      bool has_out = false;
      for (int w = start; w < n && !has_out; ++w)
        if (!by_pair[v][w].empty()) has_out = true;
      if (!has_out) continue;
      path.push_back(v);
      onpath[v] = true;
      self(self, start, v);
      onpath[v] = false;
      path.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    path.assign(1, s);
    onpath.assign(n, false);
    onpath[s] = true;
    walk(walk, s, s);
  }

  // Group by cycle length for total-length-ordered combination.
  std::vector<std::vector<int>> by_len(caps.max_total_edges + 1);
  for (std::size_t i = 0; i < singles.size(); ++i) {
    int len = static_cast<int>(singles[i].ids.size());
    if (len <= caps.max_total_edges) by_len[len].push_back(static_cast<int>(i));
  }

  long long tested = 0;
  auto try_set = [&](const std::vector<const Cyc*>& parts) -> bool {
    std::uint32_t vmask = 0;
    for (const Cyc* c : parts) vmask |= c->vmask;
    if ((vmask & required_sources) != required_sources) return false;
    std::vector<ChampionEdge> edges;
    for (const Cyc* c : parts)
      for (int id : c->ids) edges.push_back(candidates[id]);
    ++tested;
    if (check_pi_conditions(p, a, edges)) {
      res.found = PIEdgeSet{std::move(edges)};
      return true;
    }
    return false;
  };

  struct Combo {
    std::vector<int> ids;
    std::vector<const Cyc*> parts;
  };
  for (int total = 1; total <= caps.max_total_edges && !res.found; ++total) {
    std::vector<Combo> combos;
    auto add = [&](std::initializer_list<const Cyc*> parts) {
      Combo c;
      c.parts.assign(parts.begin(), parts.end());
      for (const Cyc* part : c.parts) c.ids.insert(c.ids.end(), part->ids.begin(), part->ids.end());
      std::sort(c.ids.begin(), c.ids.end());
      combos.push_back(std::move(c));
    };
    for (int i : by_len[total]) add({&singles[i]});
    if (caps.max_cycles >= 2) {
      for (int l1 = 1; 2 * l1 <= total; ++l1) {
        int l2 = total - l1;
        if (l2 > caps.max_total_edges) continue;
        for (int i : by_len[l1]) {
          for (int j : by_len[l2]) {
            if (l1 == l2 && j <= i) continue;
            if (singles[i].vmask & singles[j].vmask) continue;
            add({&singles[i], &singles[j]});
          }
        }
      }
    }
    if (caps.max_cycles >= 3) {
      for (int l1 = 1; 3 * l1 <= total; ++l1) {
        for (int l2 = l1; l1 + 2 * l2 <= total; ++l2) {
          int l3 = total - l1 - l2;
          if (l3 < l2 || l3 > caps.max_total_edges) continue;
          for (int i : by_len[l1]) {
            for (int j : by_len[l2]) {
              if (l1 == l2 && j <= i) continue;
              if (singles[i].vmask & singles[j].vmask) continue;
              for (int k : by_len[l3]) {
                if (l2 == l3 && k <= j) continue;
                if (l1 == l3 && k <= i) continue;
                if ((singles[i].vmask | singles[j].vmask) & singles[k].vmask) continue;
                add({&singles[i], &singles[j], &singles[k]});
              }
            }
          }
        }
      }
    }
    std::stable_sort(combos.begin(), combos.end(),
                     [](const Combo& x, const Combo& y) { return x.ids < y.ids; });
    for (const Combo& c : combos) {
      if (tested >= caps.max_candidate_sets) {
        res.exhausted = false;
        return res;
      }
      if (try_set(c.parts)) break;
    }
  }
  if (truncated) res.exhausted = false;
  return res;
}

}  // namespace efx
