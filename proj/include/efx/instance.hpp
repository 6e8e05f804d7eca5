#pragma once

#include <string>
#include <vector>

#include "efx/errors.hpp"
#include "efx/valuation.hpp"

namespace efx {

/// A fair-division problem: m items and one valuation per agent.
/// Names and the agent ordering are optional decoration.
struct Instance {
  int m = 0;
  std::vector<ValuationDescriptor> agents;
  std::vector<std::string> item_names;   // empty, or one per item
  std::vector<std::string> agent_names;  // empty, or one per agent
  std::vector<int> ordering;             // empty, or a permutation of the agents

  int agent_count() const { return static_cast<int>(agents.size()); }

  std::string item_name(int i) const {
    return item_names.empty() ? std::to_string(i) : item_names[i];
  }
  std::string agent_name(int i) const {
    return agent_names.empty() ? std::to_string(i) : agent_names[i];
  }
};

using AgentOrdering = std::vector<int>;

inline AgentOrdering default_ordering(int n) {
  AgentOrdering o(n);
  for (int i = 0; i < n; ++i) o[i] = i;
  return o;
}

inline void validate_ordering(const AgentOrdering& o, int n) {
  if (static_cast<int>(o.size()) != n) throw ArgumentError("agent ordering: wrong length");
  std::vector<bool> seen(n, false);
  for (int a : o) {
    if (a < 0 || a >= n || seen[a]) throw ArgumentError("agent ordering: not a permutation");
    seen[a] = true;
  }
}

/// Prepared instance: every agent's valuation validated and equipped with
/// its comparison proxy. Construction rejects malformed descriptors and
/// table valuations without a usable proxy.
class Profile {
 public:
  explicit Profile(const Instance& inst) : m_(inst.m) {
    if (inst.agents.empty()) throw MalformedInstanceError("instance has no agents");
    if (inst.m < 0 || inst.m > ItemSet::kMaxItems)
      throw MalformedInstanceError("instance item count out of range");
    if (inst.agent_count() > 16) throw CapacityError("instance agent count capped at 16");
    if (!inst.item_names.empty() && static_cast<int>(inst.item_names.size()) != inst.m)
      throw MalformedInstanceError("item_names: wrong length");
    if (!inst.agent_names.empty() && inst.agent_names.size() != inst.agents.size())
      throw MalformedInstanceError("agent_names: wrong length");
    if (!inst.ordering.empty()) {
      try {
        validate_ordering(inst.ordering, inst.agent_count());
      } catch (const Error& e) {
        throw MalformedInstanceError(e.what());
      }
    }
    vals_.reserve(inst.agents.size());
    for (std::size_t i = 0; i < inst.agents.size(); ++i) {
      try {
        vals_.emplace_back(inst.agents[i]);
      } catch (const Error& e) {
        throw MalformedInstanceError("agent " + std::to_string(i) + ": " + e.what());
      }
      if (vals_.back().item_count() != m_)
        throw MalformedInstanceError("agent " + std::to_string(i) + ": item count mismatch");
    }
  }

  int agent_count() const { return static_cast<int>(vals_.size()); }
  int item_count() const { return m_; }
  ItemSet universe() const { return ItemSet::full(m_); }
  const Valuation& val(int agent) const { return vals_[agent]; }

 private:
  int m_;
  std::vector<Valuation> vals_;
};

}  // namespace efx
