#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "efx/certificate.hpp"

namespace efx {

using json = nlohmann::json;

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kCertificateSchemaVersion = 1;

namespace io_detail {

inline const json& need(const json& j, const char* field, const std::string& where) {
  auto it = j.find(field);
  if (it == j.end()) throw MalformedInstanceError(where + ": missing field '" + field + "'");
  return *it;
}

inline std::vector<int> int_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw MalformedInstanceError(where + ": expected an array");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw MalformedInstanceError(where + ": expected integers");
    out.push_back(x.get<int>());
  }
  return out;
}

inline ItemSet item_set(const json& j, int m, const std::string& where) {
  ItemSet s;
  for (int i : int_list(j, where)) {
    if (i < 0 || i >= m) throw MalformedInstanceError(where + ": item index out of range");
    if (s.contains(i)) throw MalformedInstanceError(where + ": duplicate item");
    s = s.with(i);
  }
  return s;
}

inline json items_json(ItemSet s) {
  json out = json::array();
  for (int i : s) out.push_back(i);
  return out;
}

}  // namespace io_detail

inline ValuationKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "additive") return ValuationKind::additive;
  if (s == "unit_demand") return ValuationKind::unit_demand;
  if (s == "budget_additive") return ValuationKind::budget_additive;
  if (s == "multiplicative") return ValuationKind::multiplicative;
  if (s == "table") return ValuationKind::table;
  throw MalformedInstanceError(where + ": unknown valuation kind '" + s + "'");
}

inline json descriptor_to_json(const ValuationDescriptor& d) {
  json out;
  out["kind"] = to_string(d.kind);
  out["values"] = d.item_values;
  if (d.kind == ValuationKind::budget_additive) out["budget"] = d.budget;
  return out;
}

inline ValuationDescriptor descriptor_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw MalformedInstanceError(where + ": expected an object");
  ValuationDescriptor d;
  d.kind = parse_kind(io_detail::need(j, "kind", where).get<std::string>(), where);
  const json& vals = io_detail::need(j, "values", where);
  if (!vals.is_array()) throw MalformedInstanceError(where + ".values: expected an array");
  for (const auto& v : vals) {
    if (!v.is_number_integer())
      throw MalformedInstanceError(where + ".values: expected integer values");
    d.item_values.push_back(v.get<std::int64_t>());
  }
  if (d.kind == ValuationKind::budget_additive)
    d.budget = io_detail::need(j, "budget", where).get<std::int64_t>();
  return d;
}

inline json instance_to_json(const Instance& inst) {
  json out;
  out["version"] = kInstanceSchemaVersion;
  out["items"] = inst.m;
  out["agents"] = json::array();
  for (const auto& d : inst.agents) out["agents"].push_back(descriptor_to_json(d));
  if (!inst.item_names.empty()) out["item_names"] = inst.item_names;
  if (!inst.agent_names.empty()) out["agent_names"] = inst.agent_names;
  if (!inst.ordering.empty()) out["ordering"] = inst.ordering;
  return out;
}

inline Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInstanceError("instance: expected a JSON object");
  int version = io_detail::need(j, "version", "instance").get<int>();
  if (version != kInstanceSchemaVersion)
    throw MalformedInstanceError("instance: unsupported schema version " + std::to_string(version));
  Instance inst;
  inst.m = io_detail::need(j, "items", "instance").get<int>();
  const json& agents = io_detail::need(j, "agents", "instance");
  if (!agents.is_array() || agents.empty())
    throw MalformedInstanceError("instance.agents: expected a nonempty array");
  for (std::size_t i = 0; i < agents.size(); ++i)
    inst.agents.push_back(
        descriptor_from_json(agents[i], "instance.agents[" + std::to_string(i) + "]"));
  if (j.contains("item_names")) inst.item_names = j["item_names"].get<std::vector<std::string>>();
  if (j.contains("agent_names"))
    inst.agent_names = j["agent_names"].get<std::vector<std::string>>();
  if (j.contains("ordering")) inst.ordering = io_detail::int_list(j["ordering"], "instance.ordering");
  return inst;
}

inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(2); }

inline Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedInstanceError(std::string("instance: invalid JSON: ") + e.what());
  }
  Instance inst = instance_from_json(j);
  Profile check(inst);  // full validation, including table usability
  return inst;
}

inline json allocation_to_json(const Allocation& a) {
  json out;
  out["bundles"] = json::array();
  for (const ItemSet& b : a.bundles) out["bundles"].push_back(io_detail::items_json(b));
  out["unallocated"] = io_detail::items_json(a.unallocated);
  return out;
}

inline Allocation allocation_from_json(const json& j, int n, int m, const std::string& where) {
  Allocation a;
  const json& bundles = io_detail::need(j, "bundles", where);
  if (!bundles.is_array() || static_cast<int>(bundles.size()) != n)
    throw MalformedInstanceError(where + ".bundles: expected one bundle per agent");
  for (int i = 0; i < n; ++i)
    a.bundles.push_back(io_detail::item_set(bundles[i], m, where + ".bundles"));
  a.unallocated = io_detail::item_set(io_detail::need(j, "unallocated", where), m,
                                      where + ".unallocated");
  return a;
}

inline json edge_to_json(const ChampionEdge& e) {
  json out;
  out["source"] = e.source;
  out["target"] = e.target;
  out["kind"] = e.kind == EdgeKind::envy       ? "envy"
                : e.kind == EdgeKind::champion ? "champion"
                                               : "generalized";
  out["added"] = io_detail::items_json(e.added);
  out["freed"] = io_detail::items_json(e.freed);
  out["discard"] = io_detail::items_json(e.discard);
  return out;
}

inline ChampionEdge edge_from_json(const json& j, int n, int m, const std::string& where) {
  ChampionEdge e;
  e.source = io_detail::need(j, "source", where).get<int>();
  e.target = io_detail::need(j, "target", where).get<int>();
  if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n)
    throw MalformedInstanceError(where + ": agent index out of range");
  std::string kind = io_detail::need(j, "kind", where).get<std::string>();
  e.kind = kind == "envy"       ? EdgeKind::envy
           : kind == "champion" ? EdgeKind::champion
                                : EdgeKind::generalized;
  e.added = io_detail::item_set(io_detail::need(j, "added", where), m, where + ".added");
  e.freed = io_detail::item_set(io_detail::need(j, "freed", where), m, where + ".freed");
  e.discard = io_detail::item_set(io_detail::need(j, "discard", where), m, where + ".discard");
  return e;
}

inline json certificate_to_json(const SolveResult& result) {
  json out;
  out["version"] = kCertificateSchemaVersion;
  out["solver"] = result.report.solver;
  out["ordering"] = result.certificate.ordering;
  out["steps"] = json::array();
  for (const StepRecord& s : result.certificate.steps) {
    json step;
    step["kind"] = to_string(s.kind);
    step["before"] = allocation_to_json(s.before);
    step["after"] = allocation_to_json(s.after);
    if (s.pi) {
      step["edges"] = json::array();
      for (const ChampionEdge& e : s.pi->edges) step["edges"].push_back(edge_to_json(e));
    }
    if (!s.label.empty()) step["label"] = s.label;
    step["efx_after"] = s.efx_after;
    step["dominates"] = s.dominates_before;
    step["pareto_dominates"] = s.pareto_dominates_before;
    out["steps"].push_back(std::move(step));
  }
  out["final"] = allocation_to_json(result.certificate.final_alloc);
  const SolverReport& r = result.report;
  out["report"] = json{{"unallocated_count", r.unallocated_count},
                       {"charity_envied", r.charity_envied},
                       {"final_efx", r.final_efx},
                       {"fallback_used", r.fallback_used},
                       {"step_count", r.step_count},
                       {"charity_steps", r.charity_steps},
                       {"pi_steps", r.pi_steps},
                       {"candidate_steps", r.candidate_steps},
                       {"fallback_steps", r.fallback_steps},
                       {"envy_free_steps", r.envy_free_steps},
                       {"envy_free_fallbacks", r.envy_free_fallbacks}};
  return out;
}

struct ParsedCertificate {
  Certificate certificate;
  std::string solver;
};

inline ParsedCertificate certificate_from_json(const json& j, int n, int m) {
  if (!j.is_object()) throw MalformedInstanceError("certificate: expected a JSON object");
  int version = io_detail::need(j, "version", "certificate").get<int>();
  if (version != kCertificateSchemaVersion)
    throw MalformedInstanceError("certificate: unsupported schema version");
  ParsedCertificate out;
  out.solver = j.value("solver", std::string("?"));
  if (j.contains("ordering"))
    out.certificate.ordering = io_detail::int_list(j["ordering"], "certificate.ordering");
  const json& steps = io_detail::need(j, "steps", "certificate");
  int idx = 0;
  for (const json& sj : steps) {
    std::string where = "certificate.steps[" + std::to_string(idx++) + "]";
    StepRecord s;
    std::string kind = io_detail::need(sj, "kind", where).get<std::string>();
    if (kind == "charity_fix")
      s.kind = StepKind::charity_fix;
    else if (kind == "pi_edge_set")
      s.kind = StepKind::pi_edge_set;
    else if (kind == "candidate_reallocation")
      s.kind = StepKind::candidate_reallocation;
    else if (kind == "exhaustive_fallback")
      s.kind = StepKind::exhaustive_fallback;
    else
      throw MalformedInstanceError(where + ": unknown step kind '" + kind + "'");
    s.before = allocation_from_json(io_detail::need(sj, "before", where), n, m, where + ".before");
    s.after = allocation_from_json(io_detail::need(sj, "after", where), n, m, where + ".after");
    if (sj.contains("edges")) {
      PIEdgeSet pi;
      for (const json& ej : sj["edges"]) pi.edges.push_back(edge_from_json(ej, n, m, where));
      s.pi = std::move(pi);
    }
    s.label = sj.value("label", std::string());
    s.efx_after = sj.value("efx_after", false);
    s.dominates_before = sj.value("dominates", false);
    s.pareto_dominates_before = sj.value("pareto_dominates", false);
    out.certificate.steps.push_back(std::move(s));
  }
  out.certificate.final_alloc =
      allocation_from_json(io_detail::need(j, "final", "certificate"), n, m, "certificate.final");
  return out;
}

}  // namespace efx
