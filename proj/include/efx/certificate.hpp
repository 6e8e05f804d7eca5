#pragma once

#include <optional>
#include <string>
#include <vector>

#include "efx/pi.hpp"

namespace efx {

enum class StepKind { charity_fix, pi_edge_set, candidate_reallocation, exhaustive_fallback };

inline std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::charity_fix: return "charity_fix";
    case StepKind::pi_edge_set: return "pi_edge_set";
    case StepKind::candidate_reallocation: return "candidate_reallocation";
    case StepKind::exhaustive_fallback: return "exhaustive_fallback";
  }
  return "?";
}

/// One verified progress step: the allocations before and after, what
/// produced it, and the verification flags recorded at production time.
struct StepRecord {
  StepKind kind = StepKind::candidate_reallocation;
  Allocation before;
  Allocation after;
  std::optional<PIEdgeSet> pi;  // pi_edge_set steps
  std::string label;            // named construction for reallocation steps
  bool efx_after = false;
  bool dominates_before = false;
  bool pareto_dominates_before = false;
};

/// Ordered chain of progress steps from the all-unallocated start to the
/// final allocation.
struct Certificate {
  AgentOrdering ordering;
  std::vector<StepRecord> steps;
  Allocation final_alloc;
};

struct SolverReport {
  std::string solver;
  int agents = 0;
  int items = 0;
  int unallocated_count = 0;
  bool charity_envied = false;  // must end up false
  bool final_efx = false;
  bool fallback_used = false;
  int step_count = 0;
  int charity_steps = 0;
  int pi_steps = 0;
  int candidate_steps = 0;
  int fallback_steps = 0;
  int envy_free_steps = 0;      // steps taken from envy-free allocations
  int envy_free_fallbacks = 0;  // must stay 0 for the four-agent solver
  CheckStats checks;
};

struct SolveResult {
  Certificate certificate;
  SolverReport report;
  Allocation final_alloc;
};

/// Replays a certificate from the all-unallocated start: re-verifies the
/// chain linkage, every step's EFX + domination claim, and re-executes
/// the deterministic step kinds. Returns the final allocation; throws on
/// the first violated check.
inline Allocation replay_certificate(const Profile& p, const Certificate& cert) {
  AgentOrdering ordering = cert.ordering.empty() ? default_ordering(p.agent_count()) : cert.ordering;
  validate_ordering(ordering, p.agent_count());
  Allocation cur = Allocation::all_unallocated(p);
  int idx = 0;
  for (const StepRecord& s : cert.steps) {
    std::string at = "step " + std::to_string(idx++);
    if (!(s.before == cur)) throw InvariantViolationError(at + ": chain broken (before mismatch)");
    validate_allocation(p, s.after);
    if (!is_efx(p, s.after)) throw InvariantViolationError(at + ": allocation after step is not EFX");
    if (!dominates(p, s.after, s.before, ordering))
      throw InvariantViolationError(at + ": step does not advance the potential");
    switch (s.kind) {
      case StepKind::charity_fix: {
        auto fixed = charity_fix(p, cur);
        if (!fixed || !(*fixed == s.after))
          throw InvariantViolationError(at + ": charity step does not reproduce");
        break;
      }
      case StepKind::pi_edge_set: {
        if (!s.pi) throw InvariantViolationError(at + ": pi step without an edge set");
        Allocation redone = apply_pi(p, cur, *s.pi);
        if (!(redone == s.after))
          throw InvariantViolationError(at + ": edge-set application does not reproduce");
        break;
      }
      case StepKind::candidate_reallocation:
      case StepKind::exhaustive_fallback:
        break;  // verified by the generic checks above
    }
    cur = s.after;
  }
  if (!(cur == cert.final_alloc))
    throw InvariantViolationError("certificate: final allocation does not match the chain");
  return cur;
}

}  // namespace efx
