#include <catch2/catch_amalgamated.hpp>

#include "efx/allocation.hpp"
#include "efx/oracle.hpp"
#include "helpers.hpp"

using namespace efx;

TEST_CASE("envy predicates on the reference allocation") {
  Profile p(testing::table1());
  Allocation x = testing::table1_alloc();
  validate_allocation(p, x);

  CHECK(envies_agent(p, x, 0, 1));   // {a,b,c} <_1 {d}
  CHECK_FALSE(envies_agent(p, x, 1, 0));
  CHECK_FALSE(envies(p, x, 0, x.bundles[0]));  // irreflexive

  for (int i = 0; i < 3; ++i) CHECK_FALSE(strongly_envies(p, x, i, ItemSet{3}));  // singletons
  CHECK(is_efx(p, x));
  CHECK_FALSE(is_ef(p, x));
}

TEST_CASE("EFX counterexample with identical valuations") {
  Instance inst;
  inst.m = 3;
  inst.agents = {additive({1, 1, 2}), additive({1, 1, 2})};
  Profile p(inst);
  Allocation bad;
  bad.bundles = {ItemSet{0, 2}, ItemSet{1}};
  bad.unallocated = ItemSet{};
  CHECK(strongly_envies(p, bad, 1, bad.bundles[0]));
  CHECK_FALSE(is_efx(p, bad));

  Allocation good;
  good.bundles = {ItemSet{0, 1}, ItemSet{2}};
  good.unallocated = ItemSet{};
  CHECK(is_efx(p, good));

  Allocation empty = Allocation::all_unallocated(p);
  CHECK(is_efx(p, empty));
  CHECK(is_ef(p, empty));
}

TEST_CASE("most envious agent of a set") {
  Profile p(testing::table1());
  Allocation x = testing::table1_alloc();

  SECTION("champion of agent 1's bundle plus the pool item") {
    auto me = most_envious(p, x, ItemSet{0, 1, 2, 6});
    REQUIRE(me);
    CHECK(me->agent == 1);
    CHECK(me->envied_subset == ItemSet{1, 6});
    CHECK(me->discard == ItemSet{0, 2});
  }
  SECTION("no envier, no result") {
    CHECK_FALSE(most_envious(p, x, ItemSet{4}));  // worth 0/1/3 against 6/6/6
  }
  SECTION("result invariants and oracle membership") {
    std::mt19937_64 rng(0x111);
    for (int it = 0; it < 25; ++it) {
      int n = 2 + static_cast<int>(rng() % 3);
      int m = 3 + static_cast<int>(rng() % 4);
      Profile rp(testing::random_instance(rng(), n, m, 9));
      auto all = oracle::enumerate_efx(rp, m, {});
      const Allocation& a = all[rng() % all.size()];
      ItemSet s = ItemSet::of_bits(rng() & (rp.universe().bits()));
      auto me = most_envious(rp, a, s);
      auto valid = oracle::enumerate_most_envious(rp, a, s);
      if (!me) {
        REQUIRE(valid.empty());
        continue;
      }
      REQUIRE(me->envied_subset.subset_of(s));
      REQUIRE(envies(rp, a, me->agent, me->envied_subset));
      for (int q = 0; q < n; ++q) REQUIRE_FALSE(strongly_envies(rp, a, q, me->envied_subset));
      bool member = false;
      for (auto& [agent, kept] : valid)
        if (agent == me->agent && kept == me->envied_subset) member = true;
      REQUIRE(member);
    }
  }
}

TEST_CASE("charity fix hands out the smallest envied pool subset") {
  SECTION("no envy toward the pool") {
    Profile p(testing::table1());
    Allocation x = testing::table1_alloc();
    CHECK_FALSE(charity_fix(p, x));

    Allocation done = x;
    done.bundles[0] = done.bundles[0] | done.unallocated;
    done.unallocated = ItemSet{};
    CHECK_FALSE(charity_fix(p, done));
  }
  SECTION("forced single agent") {
    Instance inst;
    inst.m = 1;
    inst.agents = {additive({5})};
    Profile p(inst);
    auto fixed = charity_fix(p, Allocation::all_unallocated(p));
    REQUIRE(fixed);
    CHECK(fixed->bundles[0] == ItemSet{0});
    CHECK(fixed->unallocated.empty());
  }
  SECTION("random EFX inputs stay EFX; exactly one agent improves") {
    std::mt19937_64 rng(0x222);
    int exercised = 0;
    for (int it = 0; it < 40; ++it) {
      int n = 2 + static_cast<int>(rng() % 3);
      int m = 3 + static_cast<int>(rng() % 4);
      Profile rp(testing::random_instance(rng(), n, m, 9));
      auto all = oracle::enumerate_efx(rp, m, {});
      const Allocation& a = all[rng() % all.size()];
      auto fixed = charity_fix(rp, a);
      bool envied = false;
      for (int i = 0; i < n; ++i) envied |= envies(rp, a, i, a.unallocated);
      REQUIRE(static_cast<bool>(fixed) == envied);
      if (!fixed) continue;
      ++exercised;
      REQUIRE(is_efx(rp, *fixed));
      REQUIRE(pareto_dominates(rp, *fixed, a));
      int improved = 0;
      for (int i = 0; i < n; ++i)
        if (rp.val(i).cmp(fixed->bundles[i], a.bundles[i]) > 0) ++improved;
      REQUIRE(improved == 1);
    }
    REQUIRE(exercised > 0);
  }
}

TEST_CASE("domination orders") {
  Profile p(testing::table1());
  Allocation x = testing::table1_alloc();
  AgentOrdering ord = default_ordering(3);

  CHECK_FALSE(dominates(p, x, x, ord));
  CHECK_FALSE(pareto_dominates(p, x, x));

  Allocation better = x;
  better.bundles[0] = better.bundles[0] | ItemSet{6};
  better.unallocated = ItemSet{};
  CHECK(pareto_dominates(p, better, x));
  CHECK(dominates(p, better, x, ord));

  SECTION("first agent ties exactly, second improves") {
    Allocation y = x;
    y.bundles[1] = ItemSet{3, 6};
    y.unallocated = ItemSet{};
    CHECK(dominates(p, y, x, ord));
    CHECK(dominates(p, y, x, AgentOrdering{1, 0, 2}));
    CHECK(pareto_dominates(p, y, x));
  }
  SECTION("pareto implies dominates for every tested pair") {
    std::mt19937_64 rng(0x333);
    for (int it = 0; it < 30; ++it) {
      int n = 2 + static_cast<int>(rng() % 3);
      int m = 3 + static_cast<int>(rng() % 3);
      Profile rp(testing::random_instance(rng(), n, m, 9));
      auto all = oracle::enumerate_efx(rp, m, {});
      const Allocation& a = all[rng() % all.size()];
      const Allocation& b = all[rng() % all.size()];
      if (pareto_dominates(rp, a, b)) REQUIRE(dominates(rp, a, b, default_ordering(n)));
    }
  }
}

TEST_CASE("dominates is a strict partial order", "[property]") {
  std::mt19937_64 rng(0x334);
  for (int it = 0; it < 12; ++it) {
    int n = 2 + static_cast<int>(rng() % 3);
    int m = 3 + static_cast<int>(rng() % 3);
    Profile rp(testing::random_instance(rng(), n, m, 9));
    AgentOrdering ord = default_ordering(n);
    auto all = oracle::enumerate_efx(rp, m, {});
    for (int trial = 0; trial < 30; ++trial) {
      const Allocation& a = all[rng() % all.size()];
      const Allocation& b = all[rng() % all.size()];
      const Allocation& c = all[rng() % all.size()];
      REQUIRE_FALSE(dominates(rp, a, a, ord));  // irreflexive
      if (dominates(rp, a, b, ord)) REQUIRE_FALSE(dominates(rp, b, a, ord));  // asymmetric
      if (dominates(rp, a, b, ord) && dominates(rp, b, c, ord))
        REQUIRE(dominates(rp, a, c, ord));  // transitive
    }
  }
}
