#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "efx/allocation.hpp"

namespace efx {

/// Counters for the structural properties that are re-verified on every
/// graph build. A failed check throws InvariantViolationError; the
/// counters record how many times each property was exercised.
struct CheckStats {
  long long graphs_built = 0;
  long long exists_champion = 0;
  long long pivot_not_in_discard = 0;     // g never lands in a non-envier's discard
  long long non_champion_top_half = 0;    // non-champions do not envy T_j + g
  long long top_half_order = 0;           // T_k below T_j for the right observers
  long long bottom_bundle_order = 0;      // B_target below B_owner for non-enviers
  long long external_source_families = 0; // all-external families never share one calm source
  long long predecessor_exclusion = 0;    // pred(owner) never sources an owner-bottom edge
  long long pi_applications = 0;
  long long backward_propagation = 0;     // two-valuation runs: champions are class-downward-closed

  CheckStats& operator+=(const CheckStats& o) {
    graphs_built += o.graphs_built;
    exists_champion += o.exists_champion;
    pivot_not_in_discard += o.pivot_not_in_discard;
    non_champion_top_half += o.non_champion_top_half;
    top_half_order += o.top_half_order;
    bottom_bundle_order += o.bottom_bundle_order;
    external_source_families += o.external_source_families;
    predecessor_exclusion += o.predecessor_exclusion;
    pi_applications += o.pi_applications;
    backward_propagation += o.backward_propagation;
    return *this;
  }
};

enum class EdgeKind { envy, champion, generalized };

/// One labeled edge of the champion multigraph. The source is a most
/// envious agent of (X_target - freed) | added, keeping that set minus
/// `discard`. Envy edges have added = freed = discard = {}; a basic
/// champion edge has added = {g} for one unallocated g and freed = {}.
struct ChampionEdge {
  int source = -1;
  int target = -1;
  ItemSet added;    // items handed to the source on top of the target's bundle
  ItemSet freed;    // part of the target's bundle displaced for reuse elsewhere
  ItemSet discard;  // items the source drops from the claimed set
  EdgeKind kind = EdgeKind::generalized;

  ItemSet claimed(const Allocation& a) const { return (a.bundles[target] - freed) | added; }
  ItemSet kept(const Allocation& a) const { return claimed(a) - discard; }

  friend bool operator==(const ChampionEdge& a, const ChampionEdge& b) {
    return a.source == b.source && a.target == b.target && a.added == b.added &&
           a.freed == b.freed && a.discard == b.discard && a.kind == b.kind;
  }
  friend bool operator<(const ChampionEdge& a, const ChampionEdge& b) {
    return std::tuple(a.kind, a.added.bits(), a.target, a.source, a.freed.bits(), a.discard.bits()) <
           std::tuple(b.kind, b.added.bits(), b.target, b.source, b.freed.bits(), b.discard.bits());
  }
};

/// Champion-set queries against one fixed allocation, memoized per claimed
/// set. An agent is a champion of W when some subset of W it envies is
/// strongly envied by nobody; the canonical kept subset per champion is
/// the largest such subset (ties to the smallest bitmask).
class ChampionQuery {
 public:
  ChampionQuery(const Profile& p, const Allocation& a) : p_(p), a_(a) {
    own_.reserve(p.agent_count());
    for (int i = 0; i < p.agent_count(); ++i) own_.push_back(a.bundles[i]);
  }

  struct Entry {
    int agent;
    ItemSet keep;
  };
  using ChampionSet = std::vector<Entry>;  // ascending agent order

  const ChampionSet& champions(ItemSet w) {
    auto it = memo_.find(w.bits());
    if (it != memo_.end()) return it->second;
    return memo_.emplace(w.bits(), compute(w, ~0u)).first->second;
  }

  /// Champion set where only agents in `agent_mask` count, both as
  /// enviers and as strong-envy objectors.
  ChampionSet champions_among(ItemSet w, std::uint32_t agent_mask) const {
    return compute(w, agent_mask);
  }

  bool is_champion(int agent, ItemSet w) {
    for (const Entry& e : champions(w))
      if (e.agent == agent) return true;
    return false;
  }

  std::optional<ItemSet> canonical_keep(int agent, ItemSet w) {
    for (const Entry& e : champions(w))
      if (e.agent == agent) return e.keep;
    return std::nullopt;
  }

  const Profile& profile() const { return p_; }
  const Allocation& alloc() const { return a_; }

 private:
  ChampionSet compute(ItemSet w, std::uint32_t allowed) const {
    const int n = p_.agent_count();
    struct Best {
      bool found = false;
      ItemSet keep;
    };
    std::vector<Best> best(n);
    const std::uint64_t wb = w.bits();
    for (std::uint64_t t = wb;;) {
      ItemSet kept = ItemSet::of_bits(t);
      bool safe = true;
      for (int q = 0; q < n && safe; ++q) {
        if (!((allowed >> q) & 1)) continue;
        if (strongly_envies(p_, a_, q, kept)) safe = false;
      }
      if (safe && t != 0) {
        for (int q = 0; q < n; ++q) {
          if (!((allowed >> q) & 1)) continue;
          if (!p_.val(q).prefers(kept, own_[q])) continue;
          Best& b = best[q];
          if (!b.found || kept.size() > b.keep.size() ||
              (kept.size() == b.keep.size() && kept.bits() < b.keep.bits()))
            b = Best{true, kept};
        }
      }
      if (t == 0) break;
      t = (t - 1) & wb;
    }
    ChampionSet out;
    for (int q = 0; q < n; ++q)
      if (best[q].found) out.push_back(Entry{q, best[q].keep});
    return out;
  }

  const Profile& p_;
  const Allocation& a_;
  std::vector<ItemSet> own_;
  std::unordered_map<std::uint64_t, ChampionSet> memo_;
};

/// Generalized champion edge for an explicit (added | freed) probe against
/// agent `target`, sourced at the deterministic most envious agent.
/// Returns nothing when nobody envies the probed set.
inline std::optional<ChampionEdge> generalized_edge(const Profile& p, const Allocation& a,
                                                    int target, ItemSet added, ItemSet freed) {
  if (added.intersects(a.bundles[target]))
    throw ArgumentError("generalized_edge: added items must lie outside the target's bundle");
  if (!freed.subset_of(a.bundles[target]))
    throw ArgumentError("generalized_edge: freed items must lie inside the target's bundle");
  ItemSet w = (a.bundles[target] - freed) | added;
  auto me = most_envious(p, a, w);
  if (!me) return std::nullopt;
  EdgeKind kind = EdgeKind::generalized;
  if (added.empty() && freed.empty())
    kind = EdgeKind::envy;
  else if (freed.empty() && added.size() == 1 && added.subset_of(a.unallocated))
    kind = EdgeKind::champion;
  return ChampionEdge{me->agent, target, added, freed, me->discard, kind};
}

/// A pivot-item split of a bundle: the decomposer champions the target,
/// keeps top | {pivot}, and the discarded bottom half becomes reusable.
struct Decomposition {
  int decomposer = -1;
  int target = -1;
  int pivot = -1;
  ItemSet top;
  ItemSet bottom;
};

/// Envy edges plus every basic champion relation (all sources per target
/// and unallocated item), with their canonical discards and the induced
/// decompositions.
struct BasicGraph {
  std::vector<ChampionEdge> envy_edges;
  std::vector<ChampionEdge> champion_edges;  // sorted by (g, target, source)
  std::vector<Decomposition> decompositions;

  std::vector<int> champion_sources(int g, int target) const {
    std::vector<int> out;
    for (const ChampionEdge& e : champion_edges)
      if (e.added == ItemSet::single(g) && e.target == target) out.push_back(e.source);
    return out;
  }

  const ChampionEdge* find_champion_edge(int source, int target, int g) const {
    for (const ChampionEdge& e : champion_edges)
      if (e.source == source && e.target == target && e.added == ItemSet::single(g)) return &e;
    return nullptr;
  }

  std::vector<ChampionEdge> all_edges() const {
    std::vector<ChampionEdge> out = envy_edges;
    out.insert(out.end(), champion_edges.begin(), champion_edges.end());
    return out;
  }
};

/// Builds the basic champion graph and re-verifies, for every edge and
/// decomposition, the structural facts the downstream search relies on.
inline BasicGraph build_basic_graph(const Profile& p, const Allocation& a, ChampionQuery& q,
                                    CheckStats* stats = nullptr) {
  const int n = p.agent_count();
  BasicGraph g;
  if (stats) stats->graphs_built++;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && envies_agent(p, a, i, j))
        g.envy_edges.push_back(ChampionEdge{i, j, ItemSet(), ItemSet(), ItemSet(), EdgeKind::envy});

  for (int item : a.unallocated) {
    for (int j = 0; j < n; ++j) {
      ItemSet w = a.bundles[j].with(item);
      const ChampionQuery::ChampionSet& setw = q.champions(w);
      if (setw.empty())
        throw InvariantViolationError("champion graph: agent " + std::to_string(j) +
                                      " has no champion for item " + std::to_string(item));
      if (stats) stats->exists_champion++;
      for (const auto& entry : setw) {
        ChampionEdge e{entry.agent, j, ItemSet::single(item), ItemSet(), w - entry.keep,
                       EdgeKind::champion};
        if (!envies_agent(p, a, entry.agent, j)) {
          if (e.discard.contains(item))
            throw InvariantViolationError(
                "champion graph: pivot item discarded by a non-envying champion");
          if (stats) stats->pivot_not_in_discard++;
          g.decompositions.push_back(
              Decomposition{entry.agent, j, item, a.bundles[j] - e.discard, e.discard});
        }
        g.champion_edges.push_back(e);
      }
    }
  }

  // Non-champions never envy a top half plus its pivot.
  for (const Decomposition& d : g.decompositions) {
    for (int i = 0; i < n; ++i) {
      if (q.is_champion(i, a.bundles[d.target].with(d.pivot))) continue;
      if (envies(p, a, i, d.top.with(d.pivot)))
        throw InvariantViolationError("champion graph: non-champion envies a top half");
      if (stats) stats->non_champion_top_half++;
    }
  }

  // A decomposer ranks foreign top halves below its own target's.
  for (const Decomposition& dj : g.decompositions) {
    for (const Decomposition& dk : g.decompositions) {
      if (dj.pivot != dk.pivot || dj.target == dk.target) continue;
      if (q.is_champion(dj.decomposer, a.bundles[dk.target].with(dk.pivot))) continue;
      if (p.val(dj.decomposer).cmp(dk.top, dj.top) >= 0)
        throw InvariantViolationError("champion graph: top-half ordering violated");
      if (stats) stats->top_half_order++;
    }
  }

  std::sort(g.envy_edges.begin(), g.envy_edges.end());
  std::sort(g.champion_edges.begin(), g.champion_edges.end());
  return g;
}

/// A cycle of basic champion edges for one pivot item in which all agents
/// are distinct, no edge is doubled by envy, and the only champion
/// relations among cycle agents are the cycle edges themselves.
struct GoodCycle {
  int pivot = -1;
  std::vector<int> agents;           // agents[k+1 mod L] succeeds agents[k]
  std::vector<ChampionEdge> edges;   // edges[k]: agents[k] -> succ
  std::vector<Decomposition> decomp; // decomp[k] splits agents[k]'s bundle

  int length() const { return static_cast<int>(agents.size()); }
  int position_of(int agent) const {
    for (int k = 0; k < length(); ++k)
      if (agents[k] == agent) return k;
    return -1;
  }
  int succ(int agent) const { return agents[(position_of(agent) + 1) % length()]; }
  int pred(int agent) const { return agents[(position_of(agent) + length() - 1) % length()]; }
};

inline std::vector<GoodCycle> find_good_cycles(const Profile& p, const Allocation& a,
                                               const BasicGraph& graph, int pivot) {
  const int n = p.agent_count();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const ChampionEdge& e : graph.champion_edges)
    if (e.added == ItemSet::single(pivot)) adj[e.source][e.target] = true;

  std::vector<std::vector<int>> vertex_cycles;
  std::vector<int> path;
  std::vector<bool> onpath(n, false);
  auto dfs = [&](auto&& self, int start, int u) -> void {
    for (int v = start; v < n; ++v) {
      if (!adj[u][v]) continue;
      if (v == start) {
        if (path.size() >= 2) vertex_cycles.push_back(path);
      } else if (!onpath[v]) {
        path.push_back(v);
        onpath[v] = true;
        self(self, start, v);
        onpath[v] = false;
        path.pop_back();
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path.assign(1, s);
    onpath.assign(n, false);
    onpath[s] = true;
    dfs(dfs, s, s);
  }

  std::vector<GoodCycle> out;
  for (const std::vector<int>& cyc : vertex_cycles) {
    const int L = static_cast<int>(cyc.size());
    bool good = true;
    for (int k = 0; k < L && good; ++k)
      if (envies_agent(p, a, cyc[k], cyc[(k + 1) % L])) good = false;  // parallel envy
    for (int x = 0; x < L && good; ++x)
      for (int y = 0; y < L && good; ++y)
        if (adj[cyc[x]][cyc[y]] != (cyc[y] == cyc[(x + 1) % L])) good = false;  // chords
    if (!good) continue;

    GoodCycle gc;
    gc.pivot = pivot;
    gc.agents = cyc;
    for (int k = 0; k < L; ++k) {
      const ChampionEdge* e = graph.find_champion_edge(cyc[k], cyc[(k + 1) % L], pivot);
      if (!e) throw InvariantViolationError("good cycle: missing champion edge");
      gc.edges.push_back(*e);
    }
    for (int k = 0; k < L; ++k) {
      const ChampionEdge& in = gc.edges[(k + L - 1) % L];
      gc.decomp.push_back(Decomposition{in.source, cyc[k], pivot, a.bundles[cyc[k]] - in.discard,
                                        in.discard});
    }
    out.push_back(std::move(gc));
  }
  return out;
}

/// Bottom-bundle championship edges discovered for one owner on a good
/// cycle: the full per-target family (every champion source for
/// T_target | B_owner), and the terminal edge of the discovery chain.
struct OwnerBottoms {
  int owner = -1;
  std::vector<ChampionEdge> edges;  // all discovered, every cycle target
  std::vector<ChampionEdge> chain;  // the chain actually walked
  ChampionEdge terminal;
  bool terminal_good = false;
};

namespace detail {

inline std::vector<ChampionEdge> bottom_edges_at_target(const Profile& p, const Allocation& a,
                                                        const GoodCycle& c, int owner_pos,
                                                        int target_pos, ChampionQuery& q,
                                                        CheckStats* stats) {
  const int target = c.agents[target_pos];
  const ItemSet b_owner = c.decomp[owner_pos].bottom;
  const ItemSet b_target = c.decomp[target_pos].bottom;
  const ItemSet w = c.decomp[target_pos].top | b_owner;
  const int pred_owner = c.agents[(owner_pos + c.length() - 1) % c.length()];

  std::vector<ChampionEdge> out;
  for (const auto& entry : q.champions(w)) {
    if (entry.agent == pred_owner)
      throw InvariantViolationError("bottom edges: owner's predecessor sourced an owner-bottom edge");
    ChampionEdge e{entry.agent, target, b_owner, b_target, w - entry.keep, EdgeKind::generalized};
    if (!envies_agent(p, a, e.source, target)) {
      if (p.val(e.source).cmp(b_target, b_owner) >= 0)
        throw InvariantViolationError("bottom edges: bottom-bundle ordering violated");
      if (stats) stats->bottom_bundle_order++;
    }
    out.push_back(e);
  }
  if (stats) stats->predecessor_exclusion++;
  return out;
}

}  // namespace detail

/// Walks the discovery chain for `owner_pos` on a good cycle: start at the
/// owner's successor; while the found edge is internal and does not wrap
/// past the owner, continue at the source's successor. Terminates with a
/// good or an external edge within one lap.
inline OwnerBottoms bottom_edges_for_owner(const Profile& p, const Allocation& a,
                                           const GoodCycle& c, int owner_pos, ChampionQuery& q,
                                           CheckStats* stats = nullptr) {
  const int L = c.length();
  OwnerBottoms res;
  res.owner = c.agents[owner_pos];
  auto rel = [&](int pos) { return (pos - owner_pos + L) % L; };  // owner-relative position

  // Full per-target family; targets other than the chain's are optional
  // discoveries (their claimed set may have no envier).
  for (int t = 0; t < L; ++t) {
    if (t == owner_pos) continue;
    auto found = detail::bottom_edges_at_target(p, a, c, owner_pos, t, q, stats);
    res.edges.insert(res.edges.end(), found.begin(), found.end());
  }

  int target_pos = (owner_pos + 1) % L;
  for (int steps = 0; steps <= L; ++steps) {
    auto found = detail::bottom_edges_at_target(p, a, c, owner_pos, target_pos, q, stats);
    if (found.empty())
      throw InvariantViolationError("bottom edges: discovery chain found no champion");
    const ChampionEdge* pick = nullptr;
    bool good = false;
    for (const ChampionEdge& e : found) {  // prefer good, then external, then internal
      int pos = c.position_of(e.source);
      if (pos >= 0 && rel(pos) < rel(target_pos)) {
        pick = &e;
        good = true;
        break;
      }
    }
    if (!pick) {
      for (const ChampionEdge& e : found)
        if (c.position_of(e.source) < 0) {
          pick = &e;
          break;
        }
    }
    if (!pick) pick = &found.front();  // lowest internal, strictly advances
    res.chain.push_back(*pick);
    int src_pos = c.position_of(pick->source);
    if (good || src_pos < 0) {
      res.terminal = *pick;
      res.terminal_good = good;
      return res;
    }
    if (rel(src_pos) < rel(target_pos))
      throw InvariantViolationError("bottom edges: chain failed to advance");
    target_pos = (src_pos + 1) % L;
  }
  throw InvariantViolationError("bottom edges: discovery chain exceeded one lap");
}

/// Terminal discovery edge for one owner (chain walk as above).
inline ChampionEdge discover_bottom_edges(const Profile& p, const Allocation& a, const GoodCycle& c,
                                          int owner_agent, ChampionQuery& q,
                                          CheckStats* stats = nullptr) {
  int pos = c.position_of(owner_agent);
  if (pos < 0) throw ArgumentError("discover_bottom_edges: owner not on cycle");
  return bottom_edges_for_owner(p, a, c, pos, q, stats).terminal;
}

/// All owners' discoveries for one cycle, with the family-level check: if
/// every owner's terminal edge is external, the terminals cannot all share
/// one source that envies nobody on the cycle.
struct CycleBottoms {
  std::vector<OwnerBottoms> owners;
};

inline CycleBottoms discover_cycle_bottoms(const Profile& p, const Allocation& a,
                                           const GoodCycle& c, ChampionQuery& q,
                                           CheckStats* stats = nullptr) {
  CycleBottoms out;
  for (int k = 0; k < c.length(); ++k)
    out.owners.push_back(bottom_edges_for_owner(p, a, c, k, q, stats));

  bool all_external = true;
  for (const OwnerBottoms& ob : out.owners)
    if (ob.terminal_good) all_external = false;
  if (all_external && !out.owners.empty()) {
    int src = out.owners.front().terminal.source;
    bool same = true;
    for (const OwnerBottoms& ob : out.owners)
      if (ob.terminal.source != src) same = false;
    if (same) {
      bool envies_cycle_agent = false;
      for (int agent : c.agents)
        if (envies_agent(p, a, src, agent)) envies_cycle_agent = true;
      if (!envies_cycle_agent)
        throw InvariantViolationError(
            "bottom edges: all-external family shares a source that envies no cycle agent");
    }
  }
  if (stats) stats->external_source_families++;
  return out;
}

/// For an agent that is the unique champion of `target` with respect to
/// both pivots and prefers `u_high` to `u_low`, re-choose the discards so
/// the low-pivot discard nests inside the high-pivot one. Returns the two
/// edges (low canonical, high re-chosen) or nothing when the preconditions
/// fail to produce a champion.
inline std::optional<std::pair<ChampionEdge, ChampionEdge>> rechoose_nested(
    const Allocation& a, ChampionQuery& q, int agent, int target, int u_low, int u_high) {
  auto keep_low = q.canonical_keep(agent, a.bundles[target].with(u_low));
  if (!keep_low) return std::nullopt;
  ItemSet d_low = a.bundles[target].with(u_low) - *keep_low;
  ItemSet probe = (a.bundles[target] - d_low).with(u_high);
  auto keep_high = q.canonical_keep(agent, probe);
  if (!keep_high) return std::nullopt;
  ItemSet d_high = a.bundles[target].with(u_high) - *keep_high;
  if (!d_low.subset_of(d_high))
    throw InvariantViolationError("nested discard re-choice failed to nest");
  ChampionEdge low{agent, target, ItemSet::single(u_low), ItemSet(), d_low, EdgeKind::champion};
  ChampionEdge high{agent, target, ItemSet::single(u_high), ItemSet(), d_high, EdgeKind::champion};
  return std::make_pair(low, high);
}

}  // namespace efx
