#include <catch2/catch_amalgamated.hpp>

#include "efx/oracle.hpp"
#include "efx/valuation.hpp"
#include "helpers.hpp"

using namespace efx;

TEST_CASE("bundle values per valuation class") {
  Instance t1 = testing::table1();
  CHECK(value(t1.agents[0], ItemSet{0, 1, 2}) == 6);
  CHECK(value(t1.agents[0], ItemSet{}) == 0);
  CHECK(value(t1.agents[1], ItemSet{}) == 0);

  CHECK(value(budget_additive({4, 4}, 5), ItemSet{0, 1}) == 5);
  CHECK(value(budget_additive({4, 4}, 5), ItemSet{0}) == 4);
  CHECK(value(unit_demand({2, 7, 3}), ItemSet{0, 2}) == 3);
  CHECK(value(multiplicative({2, 3, 5}), ItemSet{0, 1, 2}) == 30);
  CHECK(value(multiplicative({2, 3, 5}), ItemSet{}) == 0);
}

TEST_CASE("comparison is strict and respects the base value") {
  ValuationDescriptor d = additive({1, 2, 3, 7});
  CHECK(compare(d, ItemSet{3}, ItemSet{0, 1, 2}) == Ordering::greater);
  CHECK(compare(d, ItemSet{0, 1, 2}, ItemSet{3}) == Ordering::less);
  CHECK_THROWS_AS(compare(d, ItemSet{0}, ItemSet{0}), ArgumentError);

  // zero-value item still breaks ties upward on supersets
  ValuationDescriptor z = additive({0, 5});
  CHECK(compare(z, ItemSet{0}, ItemSet{}) == Ordering::greater);

  // equal unit-demand singletons: the higher permutation rank wins
  CHECK(compare(unit_demand({2, 2}), ItemSet{0}, ItemSet{1}) == Ordering::less);
}

TEST_CASE("canonical permutation orders items by singleton value then index") {
  Valuation v(additive({5, 1, 5, 0}));
  CHECK(v.rank_of_item(3) == 0);
  CHECK(v.rank_of_item(1) == 1);
  CHECK(v.rank_of_item(0) == 2);
  CHECK(v.rank_of_item(2) == 3);
}

TEST_CASE("cancelability checker") {
  CHECK(check_cancelable(additive({3, 1, 4, 1, 5}), 5));
  CHECK(check_cancelable(unit_demand({2, 2, 7}), 3));
  CHECK(check_cancelable(budget_additive({4, 4, 3}, 5), 3));
  CHECK(check_cancelable(multiplicative({2, 1, 3}), 3));

  SECTION("a non-cancelable table is rejected") {
    // v({0,2})=5 > v({1,2})=4 but v({0})=1 < v({1})=2
    std::vector<std::int64_t> t(8);
    t[0b000] = 0;
    t[0b001] = 1;
    t[0b010] = 2;
    t[0b100] = 3;
    t[0b011] = 3;
    t[0b101] = 5;
    t[0b110] = 4;
    t[0b111] = 6;
    CHECK_FALSE(check_cancelable(table_valuation(t), 3));
  }

  SECTION("capacity cap") {
    std::vector<std::int64_t> big(13, 1);
    CHECK_THROWS_AS(check_cancelable(additive(big), 13), CapacityError);
  }
}

TEST_CASE("degenerate cancelable table: usable as values, unusable for comparison") {
  ValuationDescriptor v = testing::degenerate_cancelable_table();
  REQUIRE(check_cancelable(v, 6));

  // the three inequality chains of its impossibility argument
  CHECK(value(v, ItemSet{0, 5}) < value(v, ItemSet{1, 4}));  // {a,f} < {b,e}
  CHECK(value(v, ItemSet{3, 4}) < value(v, ItemSet{2, 5}));  // {d,e} < {c,f}
  CHECK(value(v, ItemSet{1, 2}) < value(v, ItemSet{0, 3}));  // {b,c} < {a,d}

  CHECK_THROWS_AS(Valuation(v), UnsupportedValuationError);
  CHECK_THROWS_AS(compare(v, ItemSet{0}, ItemSet{1}), UnsupportedValuationError);
}

TEST_CASE("non-degenerate cancelable tables are accepted") {
  // strictly increasing distinct values: trivially cancelable + monotone
  std::vector<std::int64_t> t(8);
  for (int s = 0; s < 8; ++s) t[s] = 10 * __builtin_popcount(s) + s;
  t[0] = 0;
  REQUIRE(check_cancelable(table_valuation(t), 3));
  Valuation v(table_valuation(t));
  CHECK(v.cmp(ItemSet{0, 1}, ItemSet{2}) > 0);
}

TEST_CASE("descriptor validation") {
  CHECK_THROWS_AS(Valuation(multiplicative({0, 2})), MalformedInstanceError);
  CHECK_THROWS_AS(Valuation(budget_additive({1, 2}, 0)), MalformedInstanceError);
  CHECK_THROWS_AS(Valuation(additive({-1, 2})), MalformedInstanceError);
  CHECK_THROWS_AS(Valuation(table_valuation({0, 1, 2})), MalformedInstanceError);  // not 2^m
  CHECK_THROWS_AS(Valuation(table_valuation({1, 2, 3, 4})), MalformedInstanceError);  // v({})!=0
  CHECK_THROWS_AS(Valuation(table_valuation({0, 5, 3, 4})), MalformedInstanceError);  // not monotone
}

TEST_CASE("trim_to_size keeps the key-maximal subset") {
  Valuation v(additive({5, 1, 3}));
  ItemSet t{0, 1, 2};
  CHECK(oracle::max_subset_of_size(v, t, 2) == ItemSet{0, 2});  // value 8
  CHECK(trim_to_size(v, t, 2) == ItemSet{0, 2});
  CHECK(trim_to_size(v, t, 3) == t);
  CHECK(trim_to_size(v, t, 0) == ItemSet{});
  CHECK_THROWS_AS(trim_to_size(v, t, 4), ArgumentError);

  Valuation ud(unit_demand({4, 4, 1}));
  CHECK(trim_to_size(ud, ItemSet{0, 1, 2}, 1) == ItemSet{1});  // higher-rank twin wins
  CHECK(oracle::max_subset_of_size(ud, ItemSet{0, 1, 2}, 1) == ItemSet{1});
}

TEST_CASE("trim_until returns the smallest prefix above the floor") {
  Valuation v(additive({5, 1, 3}));
  ItemSet t{0, 1, 2};
  BundleKey floor6{Value(6), ~std::uint64_t{0}};
  CHECK(trim_until(v, t, floor6) == ItemSet{0, 2});

  Valuation single(additive({7}));
  CHECK(trim_until(single, ItemSet{0}, BundleKey{Value(6), ~std::uint64_t{0}}) == ItemSet{0});
  CHECK_THROWS_AS(trim_until(single, ItemSet{0}, BundleKey{Value(9), 0}), PreconditionError);

  SECTION("empty floor stops at the last nonempty prefix") {
    CHECK(trim_until(v, t, v.key(ItemSet{})) == ItemSet{0});
  }
}

namespace {

void check_proxy_properties(const ValuationDescriptor& d) {
  Valuation v(d);
  const int m = v.item_count();
  const std::uint64_t n = std::uint64_t{1} << m;
  // strict total order + respect of base + subset monotonicity
  for (std::uint64_t s = 0; s < n; ++s) {
    for (std::uint64_t t = 0; t < n; ++t) {
      ItemSet ss = ItemSet::of_bits(s), tt = ItemSet::of_bits(t);
      if (s == t) {
        REQUIRE(v.cmp(ss, tt) == 0);
        continue;
      }
      REQUIRE(v.cmp(ss, tt) != 0);
      REQUIRE(v.cmp(ss, tt) == -v.cmp(tt, ss));
      if (value(d, ss) > value(d, tt)) REQUIRE(v.cmp(ss, tt) > 0);
      if ((s & t) == s) REQUIRE(v.cmp(ss, tt) < 0);  // strict subset
    }
  }
  // cancelability of the key itself
  for (int g = 0; g < m; ++g) {
    const std::uint64_t gb = std::uint64_t{1} << g;
    for (std::uint64_t s = 0; s < n; ++s) {
      if (s & gb) continue;
      for (std::uint64_t t = 0; t < n; ++t) {
        if (t & gb) continue;
        ItemSet ss = ItemSet::of_bits(s), tt = ItemSet::of_bits(t);
        if (v.cmp(ItemSet::of_bits(s | gb), ItemSet::of_bits(t | gb)) > 0 && s != t)
          REQUIRE(v.cmp(ss, tt) > 0);
      }
    }
  }
}

}  // namespace

TEST_CASE("proxy keys: non-degenerate, respectful, cancelable", "[property]") {
  std::mt19937_64 rng(0xEF5);
  for (int it = 0; it < 30; ++it) {
    int m = 2 + static_cast<int>(rng() % 5);
    check_proxy_properties(testing::random_descriptor(rng, m, 9));
  }
  // the capped-sum trap: equal capped values with unequal uncapped sums
  check_proxy_properties(budget_additive({4, 4, 5, 2}, 6));
  check_proxy_properties(unit_demand({3, 3, 3}));
  check_proxy_properties(multiplicative({1, 1, 2}));
  check_proxy_properties(additive({0, 0, 0}));
}

TEST_CASE("rank-position table of a proxy order is cancelable", "[property]") {
  std::mt19937_64 rng(0xBEEF);
  for (int it = 0; it < 6; ++it) {
    int m = 2 + static_cast<int>(rng() % 4);
    Valuation v(testing::random_descriptor(rng, m, 9));
    std::vector<std::int64_t> ranks(std::uint64_t{1} << m);
    for (std::uint64_t s = 0; s < ranks.size(); ++s)
      ranks[s] = v.rank(ItemSet::of_bits(s));
    ValuationDescriptor lifted = table_valuation(std::move(ranks));
    REQUIRE(check_cancelable(lifted, m));
    REQUIRE_NOTHROW(Valuation(lifted));
  }
}

TEST_CASE("trim agrees with brute force on all sizes", "[property]") {
  std::mt19937_64 rng(0x7213);
  for (int it = 0; it < 40; ++it) {
    int m = 2 + static_cast<int>(rng() % 5);
    Valuation v(testing::random_descriptor(rng, m, 9));
    ItemSet t = ItemSet::of_bits(rng() & ((std::uint64_t{1} << m) - 1));
    for (int k = 0; k <= t.size(); ++k)
      REQUIRE(trim_to_size(v, t, k) == oracle::max_subset_of_size(v, t, k));
  }
}

TEST_CASE("large item counts run without rank tables") {
  std::vector<std::int64_t> w(20);
  for (int i = 0; i < 20; ++i) w[i] = (i * 37) % 11;
  Valuation v(additive(w));
  CHECK_FALSE(v.has_tables());
  ItemSet a = ItemSet::of_bits(0b1010101010101010101);
  ItemSet b = ItemSet::of_bits(0b0101010101010101010);
  CHECK(v.cmp(a, b) == -v.cmp(b, a));
  CHECK(v.cmp(a, a) == 0);
  CHECK(v.prefers(a | b, a));
  CHECK(trim_to_size(v, ItemSet{0, 1, 2, 3, 4}, 2).size() == 2);
}
