#pragma once

#include <random>

#include "efx/instance.hpp"

namespace efx::testing {

/// The 7-item, 3-agent additive profile used across the docs and tests
/// (items a..g = 0..6), with its partial EFX allocation
/// X1={a,b,c}, X2={d}, X3={e,f}, pool {g}.
inline Instance table1() {
  Instance inst;
  inst.m = 7;
  inst.item_names = {"a", "b", "c", "d", "e", "f", "g"};
  inst.agent_names = {"1", "2", "3"};
  inst.agents = {
      additive({1, 2, 3, 7, 0, 0, 0}),
      additive({1, 3, 0, 6, 1, 3, 4}),
      additive({0, 0, 5, 0, 3, 3, 2}),
  };
  return inst;
}

inline Allocation table1_alloc() {
  Allocation a;
  a.bundles = {ItemSet{0, 1, 2}, ItemSet{3}, ItemSet{4, 5}};
  a.unallocated = ItemSet{6};
  return a;
}

/// 6-item submodular valuation that is cancelable but admits no
/// non-degenerate cancelable refinement (items a..f = 0..5):
/// singletons 101,102,102,103,103,104; explicit pair table; 200 beyond.
inline ValuationDescriptor degenerate_cancelable_table() {
  const int m = 6;
  std::vector<std::int64_t> t(1u << m, 200);
  t[0] = 0;
  const std::int64_t singles[6] = {101, 102, 102, 103, 103, 104};
  for (int i = 0; i < m; ++i) t[1u << i] = singles[i];
  auto pair = [&](int x, int y, std::int64_t v) { t[(1u << x) | (1u << y)] = v; };
  pair(0, 1, 152); pair(0, 2, 152); pair(0, 3, 153); pair(0, 4, 153); pair(0, 5, 154);
  pair(1, 2, 152); pair(1, 3, 155); pair(1, 4, 155); pair(1, 5, 156);
  pair(2, 3, 155); pair(2, 4, 155); pair(2, 5, 156);
  pair(3, 4, 155); pair(3, 5, 156);
  pair(4, 5, 156);
  return table_valuation(std::move(t));
}

/// Rotationally symmetric 3-agent state whose basic champion graph is two
/// parallel rings: each agent holds a pair, two pool items, the unique
/// champion of every agent (for both pool items) is its ring predecessor.
inline Instance ring3_instance() {
  Instance inst;
  inst.m = 8;
  auto mk = [&](int self) {
    std::vector<std::int64_t> v(8);
    auto put = [&](int agent, std::int64_t a, std::int64_t b) {
      v[2 * agent] = a;
      v[2 * agent + 1] = b;
    };
    put(self, 10, 11);
    put((self + 1) % 3, 14, 6);  // successor pair: championable
    put((self + 2) % 3, 11, 9);  // predecessor pair: cold
    v[6] = 9;
    v[7] = 8;
    return additive(v);
  };
  for (int i = 0; i < 3; ++i) inst.agents.push_back(mk(i));
  return inst;
}

inline Allocation ring3_alloc() {
  Allocation a;
  a.bundles = {ItemSet{0, 1}, ItemSet{2, 3}, ItemSet{4, 5}};
  a.unallocated = ItemSet{6, 7};
  return a;
}

/// Four-agent analogue with three parallel rings (pool of three items).
inline Instance ring4_instance() {
  Instance inst;
  inst.m = 11;
  auto mk = [&](int self) {
    std::vector<std::int64_t> v(11);
    auto put = [&](int agent, std::int64_t a, std::int64_t b) {
      v[2 * agent] = a;
      v[2 * agent + 1] = b;
    };
    put(self, 10, 11);
    put((self + 1) % 4, 17, 3);
    put((self + 2) % 4, 12, 8);
    put((self + 3) % 4, 11, 9);
    v[8] = 8;
    v[9] = 7;
    v[10] = 5;
    return additive(v);
  };
  for (int i = 0; i < 4; ++i) inst.agents.push_back(mk(i));
  return inst;
}

inline Allocation ring4_alloc() {
  Allocation a;
  a.bundles = {ItemSet{0, 1}, ItemSet{2, 3}, ItemSet{4, 5}, ItemSet{6, 7}};
  a.unallocated = ItemSet{8, 9, 10};
  return a;
}

/// Four-agent envy state matching the unique no-improvement structure:
/// one envy edge 0->3, unique champions 1->0, 2->1, 3->2 for both pool
/// items, champions of 3 within {0,1}. With `cold_one` the second agent
/// is cold toward X_3, killing every good cycle.
inline Instance envy4_instance(bool cold_one) {
  Instance inst;
  inst.m = 10;
  std::vector<std::int64_t> a1{15, 5, 10, 11, 11, 9, 15, 5, 9, 7};
  if (cold_one) {
    a1[6] = 11;
    a1[7] = 9;
  }
  inst.agents = {
      additive({10, 11, 11, 9, 11, 9, 13, 9, 9, 7}),
      additive(a1),
      additive({11, 9, 15, 5, 10, 11, 11, 9, 9, 7}),
      additive({11, 9, 11, 9, 15, 5, 10, 11, 9, 7}),
  };
  return inst;
}

inline Allocation envy4_alloc() {
  Allocation a;
  a.bundles = {ItemSet{0, 1}, ItemSet{2, 3}, ItemSet{4, 5}, ItemSet{6, 7}};
  a.unallocated = ItemSet{8, 9};
  return a;
}

inline ValuationDescriptor random_descriptor(std::mt19937_64& rng, int m, std::int64_t maxv) {
  int kind = static_cast<int>(rng() % 4);
  std::vector<std::int64_t> v(m);
  for (auto& x : v) x = static_cast<std::int64_t>(rng() % (maxv + 1));
  switch (kind) {
    case 0:
      return additive(std::move(v));
    case 1:
      return unit_demand(std::move(v));
    case 2:
      return budget_additive(std::move(v),
                             1 + static_cast<std::int64_t>(rng() % (maxv * m / 2 + 1)));
    default:
      for (auto& x : v) x = 1 + static_cast<std::int64_t>(rng() % maxv);
      return multiplicative(std::move(v));
  }
}

inline Instance random_instance(std::uint64_t seed, int n, int m, std::int64_t maxv = 20) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.m = m;
  for (int i = 0; i < n; ++i) inst.agents.push_back(random_descriptor(rng, m, maxv));
  return inst;
}

}  // namespace efx::testing
