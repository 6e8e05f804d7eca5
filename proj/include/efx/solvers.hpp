#pragma once

#include <array>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "efx/certificate.hpp"

namespace efx {

struct SolveOptions {
  PiSearchCaps pi_caps;
  long long fallback_state_cap = 80'000'000;
  int max_steps = 100'000;
};

namespace detail {

class Engine;

inline BundleKey key_max(const Valuation& v, const std::vector<ItemSet>& sets) {
  BundleKey best = v.key(sets.front());
  for (std::size_t i = 1; i < sets.size(); ++i) {
    BundleKey k = v.key(sets[i]);
    if (k > best) best = k;
  }
  return best;
}

inline ItemSet arg_key_max(const Valuation& v, const std::vector<ItemSet>& sets) {
  ItemSet best = sets.front();
  for (std::size_t i = 1; i < sets.size(); ++i)
    if (v.cmp(sets[i], best) > 0) best = sets[i];
  return best;
}

class Engine {
 public:
  Engine(const Profile& p, AgentOrdering ordering, SolveOptions opts, std::string solver)
      : p_(p), opts_(opts) {
    ordering_ = ordering.empty() ? default_ordering(p.agent_count()) : std::move(ordering);
    validate_ordering(ordering_, p.agent_count());
    cur_ = Allocation::all_unallocated(p);
    cert_.ordering = ordering_;
    report_.solver = std::move(solver);
    report_.agents = p.agent_count();
    report_.items = p.item_count();
  }

  const Profile& profile() const { return p_; }
  const Allocation& current() const { return cur_; }
  ItemSet pool() const { return cur_.unallocated; }
  const AgentOrdering& ordering() const { return ordering_; }
  CheckStats& checks() { return report_.checks; }

  bool charity_envied() const {
    for (int i = 0; i < p_.agent_count(); ++i)
      if (envies(p_, cur_, i, cur_.unallocated)) return true;
    return false;
  }

  void bump() {
    if (++loop_guard_ > opts_.max_steps)
      throw InvariantViolationError("solver: step limit exceeded without termination");
  }

  struct State {
    ChampionQuery query;
    BasicGraph graph;
    std::vector<GoodCycle> cycles;
    std::vector<ChampionEdge> candidates;
    State(const Profile& p, const Allocation& a) : query(p, a) {}
  };

  std::unique_ptr<State> make_state(bool extended) {
    auto st = std::make_unique<State>(p_, cur_);
    st->graph = build_basic_graph(p_, cur_, st->query, &report_.checks);
    st->candidates = st->graph.all_edges();
    if (!extended) return st;
    for (int g : cur_.unallocated) {
      for (GoodCycle& c : find_good_cycles(p_, cur_, st->graph, g)) {
        CycleBottoms cb = discover_cycle_bottoms(p_, cur_, c, st->query, &report_.checks);
        for (const OwnerBottoms& ob : cb.owners) {
          st->candidates.insert(st->candidates.end(), ob.edges.begin(), ob.edges.end());
          st->candidates.insert(st->candidates.end(), ob.chain.begin(), ob.chain.end());
        }
        st->cycles.push_back(std::move(c));
      }
    }
    // Nested discard re-choice for unique double champions: lets a
    // higher-valued pivot's edge release the lower-valued pivot's bottom.
    std::vector<int> pool_items = cur_.unallocated.items();
    for (int j = 0; j < p_.agent_count(); ++j) {
      for (std::size_t x = 0; x < pool_items.size(); ++x) {
        for (std::size_t y = x + 1; y < pool_items.size(); ++y) {
          int u1 = pool_items[x], u2 = pool_items[y];
          const auto& s1 = st->query.champions(cur_.bundles[j].with(u1));
          const auto& s2 = st->query.champions(cur_.bundles[j].with(u2));
          if (s1.size() != 1 || s2.size() != 1 || s1[0].agent != s2[0].agent) continue;
          int i = s1[0].agent;
          if (envies_agent(p_, cur_, i, j)) continue;
          int low = u1, high = u2;
          if (p_.val(i).cmp(ItemSet::single(u1), ItemSet::single(u2)) > 0) std::swap(low, high);
          if (auto pr = rechoose_nested(cur_, st->query, i, j, low, high)) {
            st->candidates.push_back(pr->first);
            st->candidates.push_back(pr->second);
          }
        }
      }
    }
    return st;
  }

  bool pi_step(State& st, std::uint32_t required = 0, bool* exhausted = nullptr) {
    PiSearchResult res = find_pi_edge_set(p_, cur_, st.candidates, opts_.pi_caps, required);
    if (exhausted) *exhausted = res.exhausted;
    if (!res.found) return false;
    Allocation after = apply_pi(p_, cur_, *res.found, &report_.checks);
    record(StepKind::pi_edge_set, std::move(after), std::move(res.found), "");
    return true;
  }

  bool try_charity() {
    auto fixed = charity_fix(p_, cur_);
    if (!fixed) return false;
    record(StepKind::charity_fix, std::move(*fixed), std::nullopt, "");
    return true;
  }

  /// Post-verified acceptance of a constructed reallocation; silently
  /// rejects anything that is not a valid EFX improvement.
  bool try_candidate(const Allocation& after, const std::string& label) {
    try {
      validate_allocation(p_, after);
    } catch (const ArgumentError&) {
      return false;
    }
    if (!is_efx(p_, after)) return false;
    if (!dominates(p_, after, cur_, ordering_)) return false;
    record(StepKind::candidate_reallocation, after, std::nullopt, label);
    return true;
  }

  /// Canonical enumeration of every allocation; takes the first EFX one
  /// that advances the potential.
  bool fallback_step() {
    const int n = p_.agent_count();
    const int m = p_.item_count();
    double states = 1;
    for (int i = 0; i < m; ++i) states *= n + 1;
    if (states > static_cast<double>(opts_.fallback_state_cap))
      throw CapacityError("fallback enumeration exceeds the configured state cap");
    std::vector<int> assign(m, 0);
    Allocation cand;
    for (;;) {
      cand.bundles.assign(n, ItemSet());
      cand.unallocated = ItemSet();
      for (int item = 0; item < m; ++item) {
        if (assign[item] == n)
          cand.unallocated = cand.unallocated.with(item);
        else
          cand.bundles[assign[item]] = cand.bundles[assign[item]].with(item);
      }
      if (dominates(p_, cand, cur_, ordering_) && is_efx(p_, cand)) {
        record(StepKind::exhaustive_fallback, cand, std::nullopt, "exhaustive-fallback");
        return true;
      }
      int pos = m - 1;
      while (pos >= 0 && assign[pos] == n) assign[pos--] = 0;
      if (pos < 0) break;
      ++assign[pos];
    }
    return false;
  }

  void record(StepKind kind, Allocation after, std::optional<PIEdgeSet> pi, std::string label) {
    validate_allocation(p_, after);
    const bool ef_state = is_ef(p_, cur_);
    StepRecord s;
    s.kind = kind;
    s.before = cur_;
    s.after = after;
    s.pi = std::move(pi);
    s.label = std::move(label);
    s.efx_after = is_efx(p_, after);
    s.dominates_before = dominates(p_, after, cur_, ordering_);
    s.pareto_dominates_before = pareto_dominates(p_, after, cur_);
    if (!s.efx_after) throw InvariantViolationError("solver step produced a non-EFX allocation");
    if (!s.dominates_before)
      throw InvariantViolationError("solver step failed to advance the potential");
    report_.step_count++;
    if (ef_state) report_.envy_free_steps++;
    switch (kind) {
      case StepKind::charity_fix: report_.charity_steps++; break;
      case StepKind::pi_edge_set: report_.pi_steps++; break;
      case StepKind::candidate_reallocation: report_.candidate_steps++; break;
      case StepKind::exhaustive_fallback:
        report_.fallback_steps++;
        if (ef_state) report_.envy_free_fallbacks++;
        break;
    }
    cert_.steps.push_back(std::move(s));
    cur_ = std::move(after);
  }

  SolveResult finish() {
    cert_.final_alloc = cur_;
    report_.unallocated_count = cur_.unallocated.size();
    report_.charity_envied = charity_envied();
    report_.final_efx = is_efx(p_, cur_);
    report_.fallback_used = report_.fallback_steps > 0;
    return SolveResult{std::move(cert_), std::move(report_), cur_};
  }

  const Profile& p_;
  SolveOptions opts_;
  AgentOrdering ordering_;
  Allocation cur_;
  Certificate cert_;
  SolverReport report_;
  int loop_guard_ = 0;
};

/// Champion-set probes: for every pool set usable as an added payload and
/// every compatible freed subset, emit the generalized edges that actually
/// hold in `alloc`.
inline void probe_edges(const Profile& p, const Allocation& alloc, ChampionQuery& q,
                        const std::vector<ItemSet>& pool, std::vector<ChampionEdge>& out) {
  std::set<std::uint64_t> seen_h;
  std::vector<ItemSet> hs;
  for (ItemSet h : pool)
    if (!h.empty() && seen_h.insert(h.bits()).second) hs.push_back(h);
  for (int t = 0; t < p.agent_count(); ++t) {
    for (ItemSet h : hs) {
      if (h.intersects(alloc.bundles[t])) continue;
      std::vector<ItemSet> frees{ItemSet()};
      for (ItemSet s : pool)
        if (!s.empty() && s.subset_of(alloc.bundles[t])) frees.push_back(s);
      for (ItemSet s : frees) {
        ItemSet w = (alloc.bundles[t] - s) | h;
        for (const auto& entry : q.champions(w))
          out.push_back(ChampionEdge{entry.agent, t, h, s, w - entry.keep, EdgeKind::generalized});
      }
    }
  }
}

/// PI hunt on a staged allocation: accepted when the resulting allocation
/// (which Pareto-dominates the staged one) dominates the engine's real
/// allocation. `required_sources` forces the hunted cycle through the
/// agent the potential needs improved.
inline bool staged_pi(Engine& e, const Allocation& staged, std::uint32_t required_sources,
                      const std::vector<ItemSet>& probe_pool, const std::string& label) {
  const Profile& p = e.profile();
  try {
    validate_allocation(p, staged);
  } catch (const ArgumentError&) {
    return false;
  }
  if (!is_efx(p, staged)) return false;
  ChampionQuery q(p, staged);
  BasicGraph g = build_basic_graph(p, staged, q, &e.checks());
  std::vector<ChampionEdge> candidates = g.all_edges();
  for (int item : staged.unallocated) {
    for (GoodCycle& c : find_good_cycles(p, staged, g, item)) {
      CycleBottoms cb = discover_cycle_bottoms(p, staged, c, q, &e.checks());
      for (const OwnerBottoms& ob : cb.owners) {
        candidates.insert(candidates.end(), ob.edges.begin(), ob.edges.end());
        candidates.insert(candidates.end(), ob.chain.begin(), ob.chain.end());
      }
    }
  }
  probe_edges(p, staged, q, probe_pool, candidates);
  PiSearchResult res = find_pi_edge_set(p, staged, candidates, e.opts_.pi_caps, required_sources);
  if (!res.found) return false;
  Allocation after = apply_pi(p, staged, *res.found, &e.checks());
  return e.try_candidate(after, label);
}

/// Generic vip-first reallocation attempts driven by trim_until floors.
/// Cheap constructions tried before the exhaustive fallback in envy states.
inline bool guided_improvement(Engine& e, Engine::State& st) {
  const Profile& p = e.profile();
  const Allocation& x = e.current();
  const int vip = e.ordering().front();
  const Valuation& vv = p.val(vip);
  BundleKey floor = vv.key(x.bundles[vip]);
  for (int j = 0; j < p.agent_count(); ++j) {
    if (j == vip) continue;
    for (int u : x.unallocated) {
      ItemSet w = x.bundles[j].with(u);
      auto keep = st.query.canonical_keep(vip, w);
      if (!keep) continue;
      Allocation cand = x;
      cand.bundles[vip] = *keep;
      cand.bundles[j] = x.bundles[vip];
      cand.unallocated = p.universe();
      for (const ItemSet& b : cand.bundles) cand.unallocated = cand.unallocated - b;
      if (e.try_candidate(cand, "vip-keep-swap")) return true;
      if (vv.key(w) > floor) {
        Allocation cand2 = x;
        cand2.bundles[vip] = trim_until(vv, w, floor);
        cand2.bundles[j] = x.bundles[vip];
        cand2.unallocated = p.universe();
        for (const ItemSet& b : cand2.bundles) cand2.unallocated = cand2.unallocated - b;
        if (e.try_candidate(cand2, "vip-trim-swap")) return true;
      }
    }
  }
  return false;
}

inline void rings_step(Engine& e, Engine::State& st);

}  // namespace detail

namespace detail {

inline void run_n2_loop(Engine& e) {
  const Profile& p = e.profile();
  const int n = p.agent_count();
  if (n == 1) {
    if (!e.current().unallocated.empty()) {
      Allocation all = e.current();
      all.bundles[0] = all.bundles[0] | all.unallocated;
      all.unallocated = ItemSet();
      if (!e.try_candidate(all, "take-all"))
        throw InvariantViolationError("single agent: taking everything must be accepted");
    }
    return;
  }
  while (e.pool().size() >= n - 1 || e.charity_envied()) {
    e.bump();
    if (e.try_charity()) continue;
    auto st = e.make_state(false);
    bool exhausted = true;
    if (e.pi_step(*st, 0, &exhausted)) continue;
    if (!exhausted) throw CapacityError("n2 solver: search caps hit before exhausting basic cycles");
    rings_step(e, *st);
  }
}

}  // namespace detail

/// Partial EFX with at most n-2 unallocated items, none of them envied:
/// charity fixes, then basic Pareto-improvable cycles; when none exists
/// the basic graph must collapse into parallel championship rings, and the
/// ring construction supplies the improving edge set.
inline SolveResult solve_charity_n_minus_2(const Profile& p, AgentOrdering ordering = {},
                                           SolveOptions opts = {}) {
  detail::Engine e(p, std::move(ordering), opts, "n2");
  detail::run_n2_loop(e);
  return e.finish();
}

namespace detail {

/// The structured improving edge set that exists whenever the basic graph
/// has no Pareto-improvable cycle: the graph is then a union of parallel
/// championship rings, and one ring's bottom-bundle discovery closes a
/// cycle through distinct pool items.
inline void rings_step(Engine& e, Engine::State& st) {
  const Profile& p = e.profile();
  const Allocation& a = e.current();
  const int n = p.agent_count();
  const ItemSet u = a.unallocated;
  if (u.size() != n - 1)
    throw InvariantViolationError("parallel rings: pool must hold exactly n-1 items");
  if (!st.graph.envy_edges.empty())
    throw InvariantViolationError("parallel rings: envy edge survived the cycle search");
  std::vector<int> source_of(n, -1);
  bool first = true;
  for (int g : u) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> src = st.graph.champion_sources(g, j);
      if (src.size() != 1)
        throw InvariantViolationError("parallel rings: champion is not unique");
      if (first)
        source_of[j] = src[0];
      else if (source_of[j] != src[0])
        throw InvariantViolationError("parallel rings: rings are not parallel");
    }
    first = false;
  }
  std::vector<int> succ(n, -1);
  for (int j = 0; j < n; ++j) {
    if (succ[source_of[j]] != -1)
      throw InvariantViolationError("parallel rings: branching championship");
    succ[source_of[j]] = j;
  }
  int seen = 1;
  for (int v = succ[0]; v != 0; v = succ[v]) {
    if (++seen > n) throw InvariantViolationError("parallel rings: championship not one cycle");
  }
  if (seen != n) throw InvariantViolationError("parallel rings: championship not Hamiltonian");

  const int g0 = u.lowest();
  const GoodCycle* ring = nullptr;
  std::vector<GoodCycle> cycles = find_good_cycles(p, a, st.graph, g0);
  for (const GoodCycle& c : cycles)
    if (c.length() == n) ring = &c;
  if (!ring) throw InvariantViolationError("parallel rings: ring is not a good cycle");

  OwnerBottoms ob = bottom_edges_for_owner(p, a, *ring, 0, st.query, &e.checks());
  if (!ob.terminal_good)
    throw InvariantViolationError("parallel rings: discovery must terminate internally");
  const ChampionEdge& closing = ob.terminal;
  const int owner = ring->agents[0];
  const int L = ring->length();
  std::vector<ChampionEdge> edges;
  ItemSet rest = u.without(g0);
  auto rit = rest.begin();
  for (int pos = ring->position_of(closing.target); pos != ring->position_of(closing.source);
       pos = (pos + 1) % L) {
    int xagent = ring->agents[pos];
    int yagent = ring->agents[(pos + 1) % L];
    int item;
    if (yagent == owner) {
      item = g0;  // this hop's discard is exactly the closing edge's payload
    } else {
      item = *rit;
      ++rit;
    }
    const ChampionEdge* hop = st.graph.find_champion_edge(xagent, yagent, item);
    if (!hop) throw InvariantViolationError("parallel rings: missing hop edge");
    edges.push_back(*hop);
  }
  edges.push_back(closing);
  PIEdgeSet pi{std::move(edges)};
  Allocation after = apply_pi(p, a, pi, &e.checks());
  e.record(StepKind::pi_edge_set, std::move(after), std::move(pi), "parallel-rings");
}

}  // namespace detail

namespace detail {

inline void run_three_loop(Engine& e) {
  while (!e.pool().empty()) {
    e.bump();
    if (e.try_charity()) continue;
    auto st = e.make_state(true);
    if (e.pi_step(*st)) continue;
    if (guided_improvement(e, *st)) continue;
    if (e.fallback_step()) continue;
    throw InvariantViolationError(
        "three-agent solver: no dominating EFX allocation despite unallocated items");
  }
}

}  // namespace detail

/// Full EFX for three agents: charity, then Pareto-improvable edge sets
/// (which subsume the no-envy case analysis); envy states fall back to
/// guided reallocations and, as a last resort, exhaustive search.
inline SolveResult solve_three_agents(const Profile& p, AgentOrdering ordering = {},
                                      SolveOptions opts = {}) {
  if (p.agent_count() != 3) throw PreconditionError("three-agent solver requires exactly 3 agents");
  detail::Engine e(p, std::move(ordering), opts, "three");
  detail::run_three_loop(e);
  return e.finish();
}

namespace detail {

inline std::vector<int> valuation_classes(const Profile& p, std::size_t* class_count) {
  std::vector<ValuationDescriptor> distinct;
  std::vector<int> class_of(p.agent_count(), -1);
  for (int i = 0; i < p.agent_count(); ++i) {
    const ValuationDescriptor& d = p.val(i).descriptor();
    for (std::size_t c = 0; c < distinct.size(); ++c)
      if (distinct[c] == d) class_of[i] = static_cast<int>(c);
    if (class_of[i] < 0) {
      distinct.push_back(d);
      class_of[i] = static_cast<int>(distinct.size()) - 1;
    }
  }
  if (class_count) *class_count = distinct.size();
  return class_of;
}

inline void run_two_types_loop(Engine& e, const std::vector<int>& class_of,
                               std::size_t class_count) {
  const Profile& p = e.profile();
  auto assert_backward = [&]() {
    auto st = e.make_state(true);
    const Allocation& a = e.current();
    std::vector<std::vector<int>> members(class_count);
    for (int i = 0; i < p.agent_count(); ++i) members[class_of[i]].push_back(i);
    for (auto& ms : members)
      std::stable_sort(ms.begin(), ms.end(), [&](int x, int y) {
        return p.val(x).cmp(a.bundles[x], a.bundles[y]) < 0;
      });
    for (int g : a.unallocated) {
      for (int j = 0; j < p.agent_count(); ++j) {
        std::vector<int> sources = st->graph.champion_sources(g, j);
        for (const auto& ms : members) {
          bool above = false;  // walking down from the top of the class
          for (auto it = ms.rbegin(); it != ms.rend(); ++it) {
            bool is_src = std::find(sources.begin(), sources.end(), *it) != sources.end();
            if (above && !is_src)
              throw InvariantViolationError(
                  "two-type solver: championship failed to propagate backward in a class");
            if (is_src) above = true;
          }
        }
        e.checks().backward_propagation++;
      }
    }
    return st;
  };

  while (!e.pool().empty()) {
    e.bump();
    auto st = assert_backward();
    if (e.try_charity()) continue;
    if (e.pi_step(*st)) continue;
    if (guided_improvement(e, *st)) continue;
    if (e.fallback_step()) continue;
    throw InvariantViolationError(
        "two-type solver: no dominating EFX allocation despite unallocated items");
  }
}

}  // namespace detail

/// EFX for agents holding one of (at most) two valuations: championship
/// propagates backward within a class, so the minimal agents of the two
/// classes always close an improvable two-cycle; verified at every step.
inline SolveResult solve_two_types(const Profile& p, AgentOrdering ordering = {},
                                   SolveOptions opts = {}) {
  std::size_t class_count = 0;
  std::vector<int> class_of = detail::valuation_classes(p, &class_count);
  if (class_count > 2)
    throw PreconditionError("two-type solver requires at most two distinct valuations");
  detail::Engine e(p, std::move(ordering), opts, "twotype");
  detail::run_two_types_loop(e, class_of, class_count);
  return e.finish();
}

namespace detail {

/// The unique basic-edge shape of a four-agent envy state with no
/// improvable cycle, after relabeling: one envy edge 1->4, unique double
/// champions 2->1, 3->2, 4->3 for both pivots, and pivot champions of 4
/// among {1,2}. Pivots are named so label 4 prefers h to g, and label 3's
/// g-discard nests inside its h-discard.
struct EnvyStructure {
  int g = -1, h = -1;
  std::array<int, 5> ag{};                   // label (1..4) -> agent
  std::array<ItemSet, 4> tg{}, bg{}, th{}, bh{};  // label (1..3) decompositions
};

inline std::optional<EnvyStructure> match_envy_structure(Engine& e, Engine::State& st, int u1,
                                                         int u2) {
  const Profile& p = e.profile();
  const Allocation& a = e.current();
  if (st.graph.envy_edges.size() != 1) return std::nullopt;
  const ChampionEdge envy = st.graph.envy_edges.front();
  std::vector<int> rest;
  for (int i = 0; i < 4; ++i)
    if (i != envy.source && i != envy.target) rest.push_back(i);

  for (int flip = 0; flip < 2; ++flip) {
    EnvyStructure s;
    s.ag[1] = envy.source;
    s.ag[4] = envy.target;
    s.ag[2] = rest[flip];
    s.ag[3] = rest[1 - flip];
    bool ok = true;
    for (int u : {u1, u2}) {
      for (int lbl = 1; lbl <= 3 && ok; ++lbl) {
        std::vector<int> src = st.graph.champion_sources(u, s.ag[lbl]);
        if (src.size() != 1 || src[0] != s.ag[lbl + 1]) ok = false;
      }
      if (!ok) break;
      for (int src : st.graph.champion_sources(u, s.ag[4]))
        if (src != s.ag[1] && src != s.ag[2]) ok = false;
      if (!ok) break;
    }
    if (!ok) continue;
    s.g = u1;
    s.h = u2;
    if (p.val(s.ag[4]).cmp(ItemSet::single(u1), ItemSet::single(u2)) > 0) std::swap(s.g, s.h);
    for (int lbl = 1; lbl <= 3; ++lbl) {
      const ChampionEdge* ge = st.graph.find_champion_edge(s.ag[lbl + 1], s.ag[lbl], s.g);
      const ChampionEdge* he = st.graph.find_champion_edge(s.ag[lbl + 1], s.ag[lbl], s.h);
      if (!ge || !he) return std::nullopt;
      s.bg[lbl] = ge->discard;
      s.bh[lbl] = he->discard;
    }
    // Nest label 3's discards across the two pivots.
    if (auto pr = rechoose_nested(a, st.query, s.ag[4], s.ag[3], s.g, s.h)) {
      s.bg[3] = pr->first.discard;
      s.bh[3] = pr->second.discard;
    }
    for (int lbl = 1; lbl <= 3; ++lbl) {
      s.tg[lbl] = a.bundles[s.ag[lbl]] - s.bg[lbl];
      s.th[lbl] = a.bundles[s.ag[lbl]] - s.bh[lbl];
    }
    return s;
  }
  return std::nullopt;
}

inline Allocation rebuild_pool(const Profile& p, Allocation a) {
  a.unallocated = p.universe();
  for (const ItemSet& b : a.bundles) a.unallocated = a.unallocated - b;
  return a;
}

inline std::vector<ItemSet> structure_probe_pool(const EnvyStructure& s, Engine::State& st) {
  std::vector<ItemSet> pool;
  for (int lbl = 1; lbl <= 3; ++lbl) {
    pool.push_back(s.bg[lbl]);
    pool.push_back(s.bh[lbl]);
  }
  for (const ChampionEdge& e2 : st.graph.champion_edges) {
    if (e2.target != s.ag[4]) continue;
    if (e2.added != ItemSet::single(s.g) && e2.added != ItemSet::single(s.h)) continue;
    pool.push_back(e2.discard);
    pool.push_back(e2.discard.without(s.g));
    pool.push_back(e2.discard.without(s.h));
  }
  for (int b : s.bg[1]) pool.push_back(ItemSet::single(b));
  return pool;
}

/// Candidate reallocations for the structured envy state when the
/// potential's lead agent is not label 2.
inline bool four_envy_vip_other(Engine& e, Engine::State& st, const EnvyStructure& s) {
  const Profile& p = e.profile();
  const Allocation& x = e.current();
  const int a1 = s.ag[1], a2 = s.ag[2], a3 = s.ag[3], a4 = s.ag[4];
  const int vip = e.ordering().front();
  std::vector<ItemSet> pool = structure_probe_pool(s, st);

  Allocation xp = x;  // first attempt: rotate tops toward the envy edge
  xp.bundles[a1] = x.bundles[a4];
  xp.bundles[a2] = s.tg[1] | s.bg[2];
  xp.bundles[a3] = s.tg[2].with(s.g);
  xp.bundles[a4] = s.th[3].with(s.h);
  xp = rebuild_pool(p, xp);
  if (e.try_candidate(xp, "envy:rotate-tops")) return true;

  const Valuation& v2 = p.val(a2);
  std::vector<ItemSet> menu{x.bundles[a4], s.tg[2].with(s.g), s.th[3].with(s.h), x.bundles[a3]};
  ItemSet carrier = s.tg[1] | s.bg[2];
  BundleKey floor2 = key_max(v2, menu);
  if (!(v2.key(carrier) > floor2)) return false;
  ItemSet z = trim_until(v2, carrier, floor2);

  if (p.val(a1).cmp(x.bundles[a4], z) > 0) {
    Allocation y = xp;
    y.bundles[a2] = z;
    y = rebuild_pool(p, y);
    return e.try_candidate(y, "envy:rotate-tops-trimmed");
  }

  ItemSet best2 = arg_key_max(v2, menu);
  Allocation xpp = x;
  xpp.bundles[a1] = z;
  xpp.bundles[a2] = best2;
  xpp.bundles[a3] = best2 == s.tg[2].with(s.g) ? x.bundles[a3] : s.tg[2].with(s.g);
  xpp.bundles[a4] = best2 == x.bundles[a4] ? s.th[3].with(s.h) : x.bundles[a4];
  xpp = rebuild_pool(p, xpp);
  if (e.try_candidate(xpp, "envy:lead-trim")) return true;
  if (!is_efx(p, xpp)) return false;
  return staged_pi(e, xpp, 1u << vip, pool, "envy:lead-trim-staged");
}

/// Candidate reallocations when the potential's lead agent is label 2.
inline bool four_envy_vip_two(Engine& e, Engine::State& st, const EnvyStructure& s) {
  const Profile& p = e.profile();
  const Allocation& x = e.current();
  const int a1 = s.ag[1], a2 = s.ag[2], a3 = s.ag[3], a4 = s.ag[4];
  std::vector<ItemSet> pool = structure_probe_pool(s, st);

  std::vector<ItemSet> menu{x.bundles[a2], s.th[2].with(s.h), s.tg[1].with(s.g), x.bundles[a3]};
  ItemSet zi[2];
  int who[2] = {a1, a4};
  for (int k = 0; k < 2; ++k) {
    const Valuation& v = p.val(who[k]);
    BundleKey floor = key_max(v, menu);
    if (!(v.key(x.bundles[a4]) > floor)) return false;
    zi[k] = trim_until(v, x.bundles[a4], floor);
  }
  int w = zi[0].size() < zi[1].size() ? a1 : a4;
  int l = w == a1 ? a4 : a1;
  ItemSet zw = w == a1 ? zi[0] : zi[1];
  ItemSet best_l = arg_key_max(p.val(l), menu);

  Allocation xp = x;
  xp.bundles[w] = x.bundles[a4];
  xp.bundles[l] = best_l;
  xp.bundles[a2] = best_l == s.tg[1].with(s.g) ? x.bundles[a2] : s.tg[1].with(s.g);
  xp.bundles[a3] = best_l == x.bundles[a3] ? s.th[2].with(s.h) : x.bundles[a3];
  xp = rebuild_pool(p, xp);

  if (!(xp.bundles[a2] == x.bundles[a2])) {
    Allocation y = xp;
    y.bundles[w] = zw;
    y = rebuild_pool(p, y);
    return e.try_candidate(y, "envy:pair-trim");
  }

  // Here xp = {w: X4, l: top(g)+g, 2: X2, 3: X3}; h and bg[1] are pooled.
  auto hindsight = [&](const Allocation& staged) -> bool {
    if (s.bg[1].empty()) return false;
    int b = s.bg[1].lowest();
    ItemSet w3 = x.bundles[a2].with(b);
    std::uint32_t mask = (1u << a2) | (1u << a3) | (1u << a4);
    ChampionQuery q(p, staged);
    for (const auto& entry : q.champions_among(w3, mask)) {
      if (entry.agent != a3) continue;
      Allocation y = x;
      y.bundles[a1] = x.bundles[a4];
      y.bundles[a4] = s.th[3].with(s.h);
      y.bundles[a3] = entry.keep;
      y.bundles[a2] = s.tg[1].with(s.g);
      y = rebuild_pool(p, y);
      if (e.try_candidate(y, "envy:hindsight-cycle")) return true;
    }
    return false;
  };

  if (is_efx(p, xp)) {
    if (staged_pi(e, xp, 1u << a2, pool, "envy:lead2-staged")) return true;
    if (hindsight(xp)) return true;
    return false;
  }

  // l strongly envies w; trim X4 under w's order until that stops.
  const Valuation& vw = p.val(w);
  ItemSet z = x.bundles[a4];
  auto l_strongly_envies = [&](ItemSet zz) {
    const Valuation& vl = p.val(l);
    for (int hdrop : zz)
      if (vl.cmp(zz.without(hdrop), xp.bundles[l]) > 0) return true;
    return false;
  };
  while (!z.empty() && l_strongly_envies(z)) z = z.without(vw.best_removal(z));
  Allocation xpp = xp;
  xpp.bundles[w] = z;
  xpp = rebuild_pool(p, xpp);
  if (!is_efx(p, xpp)) return false;
  if (staged_pi(e, xpp, 1u << a2, pool, "envy:lead2-trim-staged")) return true;
  return hindsight(xpp);
}

inline bool four_envy_branch(Engine& e, Engine::State& st) {
  const Profile& p = e.profile();
  std::vector<int> items = e.pool().items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      auto s = match_envy_structure(e, st, items[i], items[j]);
      if (!s) continue;
      // Structure probes may expose an improvable edge set directly.
      std::vector<ChampionEdge> cands = st.candidates;
      probe_edges(p, e.current(), st.query, structure_probe_pool(*s, st), cands);
      PiSearchResult res = find_pi_edge_set(p, e.current(), cands, e.opts_.pi_caps);
      if (res.found) {
        Allocation after = apply_pi(p, e.current(), *res.found, &e.checks());
        e.record(StepKind::pi_edge_set, std::move(after), std::move(res.found), "");
        return true;
      }
      const int vip_label = [&] {
        for (int lbl = 1; lbl <= 4; ++lbl)
          if (s->ag[lbl] == e.ordering().front()) return lbl;
        return 0;
      }();
      if (vip_label == 2) {
        if (four_envy_vip_two(e, st, *s)) return true;
      } else {
        if (four_envy_vip_other(e, st, *s)) return true;
      }
    }
  }
  return false;
}

}  // namespace detail

namespace detail {

inline void run_four_loop(Engine& e) {
  while (e.pool().size() >= 2 || e.charity_envied()) {
    e.bump();
    if (e.try_charity()) continue;
    auto st = e.make_state(true);
    const bool envy_free = st->graph.envy_edges.empty();
    bool exhausted = true;
    if (e.pi_step(*st, 0, &exhausted)) continue;
    if (envy_free) {
      if (!exhausted)
        throw CapacityError("four-agent solver: search caps hit in an envy-free state");
      throw InvariantViolationError(
          "four-agent solver: envy-free state admitted no Pareto-improvable edge set");
    }
    if (four_envy_branch(e, *st)) continue;
    if (e.fallback_step()) continue;
    throw InvariantViolationError(
        "four-agent solver: envy state admitted no dominating EFX allocation");
  }
}

}  // namespace detail

/// EFX for four agents with at most one unallocated, unenvied item. In
/// envy-free states an improvable edge set must exist; envy states follow
/// the structured candidate reallocations, then the exhaustive fallback.
inline SolveResult solve_four_agents(const Profile& p, AgentOrdering ordering = {},
                                     SolveOptions opts = {}) {
  if (p.agent_count() != 4) throw PreconditionError("four-agent solver requires exactly 4 agents");
  detail::Engine e(p, std::move(ordering), opts, "four");
  detail::run_four_loop(e);
  return e.finish();
}

/// One generic progress step from an EFX allocation: charity fix, then a
/// Pareto-improvable edge set over basic + discovered candidates, then
/// guided reallocations, then the exhaustive fallback. Returns nothing
/// only when no dominating EFX allocation exists at all (a fixed point of
/// the potential).
inline std::optional<std::pair<Allocation, StepRecord>> progress_step(const Profile& p,
                                                                      const Allocation& alloc,
                                                                      AgentOrdering ordering = {},
                                                                      SolveOptions opts = {}) {
  validate_allocation(p, alloc);
  if (!is_efx(p, alloc)) throw PreconditionError("progress_step: allocation must be EFX");
  detail::Engine e(p, std::move(ordering), opts, "step");
  e.cur_ = alloc;
  bool moved = e.try_charity();
  if (!moved) {
    auto st = e.make_state(true);
    moved = e.pi_step(*st) || detail::guided_improvement(e, *st) || e.fallback_step();
  }
  if (!moved) return std::nullopt;
  return std::make_pair(e.current(), e.cert_.steps.back());
}

inline int distinct_valuation_count(const Profile& p) {
  std::vector<ValuationDescriptor> distinct;
  for (int i = 0; i < p.agent_count(); ++i) {
    bool found = false;
    for (const auto& d : distinct)
      if (d == p.val(i).descriptor()) found = true;
    if (!found) distinct.push_back(p.val(i).descriptor());
  }
  return static_cast<int>(distinct.size());
}

/// Dispatch: at most two distinct valuations -> twotype; n == 3 -> three;
/// n == 4 -> four; anything else -> the n-2 charity solver.
inline SolveResult solve_auto(const Profile& p, AgentOrdering ordering = {}, SolveOptions opts = {}) {
  if (distinct_valuation_count(p) <= 2) return solve_two_types(p, std::move(ordering), opts);
  if (p.agent_count() == 3) return solve_three_agents(p, std::move(ordering), opts);
  if (p.agent_count() == 4) return solve_four_agents(p, std::move(ordering), opts);
  return solve_charity_n_minus_2(p, std::move(ordering), opts);
}

inline SolveResult solve_with(const std::string& solver, const Profile& p,
                              AgentOrdering ordering = {}, SolveOptions opts = {}) {
  if (solver == "auto") return solve_auto(p, std::move(ordering), opts);
  if (solver == "n2") return solve_charity_n_minus_2(p, std::move(ordering), opts);
  if (solver == "three") return solve_three_agents(p, std::move(ordering), opts);
  if (solver == "four") return solve_four_agents(p, std::move(ordering), opts);
  if (solver == "twotype") return solve_two_types(p, std::move(ordering), opts);
  throw ArgumentError("unknown solver: " + solver);
}

}  // namespace efx
