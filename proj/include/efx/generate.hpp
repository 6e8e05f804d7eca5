#pragma once

#include <random>
#include <vector>

#include "efx/instance.hpp"

namespace efx {

/// Seed-deterministic random instances. Uses the fixed-by-standard
/// mt19937_64 stream with plain modulo draws so files are reproducible
/// across platforms.
struct GenerateConfig {
  std::uint64_t seed = 0;
  int agents = 3;
  int items = 6;
  std::int64_t max_value = 20;
  std::vector<ValuationKind> classes = {ValuationKind::additive, ValuationKind::unit_demand,
                                        ValuationKind::budget_additive,
                                        ValuationKind::multiplicative};
  bool two_type = false;  // exactly two distinct descriptors over all agents
};

namespace gen_detail {

inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

inline ValuationDescriptor random_descriptor(std::mt19937_64& rng, const GenerateConfig& cfg) {
  ValuationKind kind = cfg.classes[draw(rng, cfg.classes.size())];
  std::vector<std::int64_t> v(cfg.items);
  for (auto& x : v) x = static_cast<std::int64_t>(draw(rng, cfg.max_value + 1));
  switch (kind) {
    case ValuationKind::additive:
      return additive(std::move(v));
    case ValuationKind::unit_demand:
      return unit_demand(std::move(v));
    case ValuationKind::budget_additive: {
      std::int64_t cap = std::max<std::int64_t>(1, cfg.max_value * cfg.items / 2);
      return budget_additive(std::move(v), 1 + static_cast<std::int64_t>(draw(rng, cap)));
    }
    case ValuationKind::multiplicative:
      for (auto& x : v) x = 1 + static_cast<std::int64_t>(draw(rng, cfg.max_value));
      return multiplicative(std::move(v));
    case ValuationKind::table:
      break;
  }
  throw ArgumentError("generator: table valuations cannot be generated randomly");
}

}  // namespace gen_detail

inline Instance generate(const GenerateConfig& cfg) {
  if (cfg.agents < 1 || cfg.items < 0 || cfg.max_value < 1)
    throw ArgumentError("generator: bounds must be positive");
  if (cfg.classes.empty()) throw ArgumentError("generator: no valuation classes selected");
  std::mt19937_64 rng(cfg.seed);
  Instance inst;
  inst.m = cfg.items;
  if (cfg.two_type) {
    ValuationDescriptor d1 = gen_detail::random_descriptor(rng, cfg);
    ValuationDescriptor d2 = gen_detail::random_descriptor(rng, cfg);
    for (int tries = 0; d2 == d1 && tries < 64; ++tries)
      d2 = gen_detail::random_descriptor(rng, cfg);
    for (int i = 0; i < cfg.agents; ++i) {
      if (i == 0)
        inst.agents.push_back(d1);
      else if (i == 1 && cfg.agents > 1)
        inst.agents.push_back(d2);
      else
        inst.agents.push_back(gen_detail::draw(rng, 2) ? d2 : d1);
    }
  } else {
    for (int i = 0; i < cfg.agents; ++i)
      inst.agents.push_back(gen_detail::random_descriptor(rng, cfg));
  }
  return inst;
}

}  // namespace efx
