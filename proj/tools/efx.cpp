// Command-line front end: generate, solve, verify, brute-force and export.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "efx/dot.hpp"
#include "efx/generate.hpp"
#include "efx/io.hpp"
#include "efx/oracle.hpp"
#include "efx/solvers.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw efx::ArgumentError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw efx::ArgumentError("cannot write file: " + path);
  out << text;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

efx::oracle::OracleBudget budget_from_env() {
  efx::oracle::OracleBudget b;
  if (const char* s = std::getenv("EFX_ORACLE_MAX_STATES")) b.max_states = std::atoll(s);
  return b;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

int item_by_name(const efx::Instance& inst, const std::string& name) {
  for (int i = 0; i < inst.m; ++i)
    if (inst.item_name(i) == name) return i;
  throw efx::ArgumentError("unknown item: " + name);
}

efx::ItemSet parse_item_set(const efx::Instance& inst, const std::string& text) {
  efx::ItemSet s;
  if (text.empty()) return s;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) s = s.with(item_by_name(inst, tok));
  return s;
}

void print_report(const efx::SolverReport& r) {
  std::cout << "solver: " << r.solver << "\n"
            << "agents: " << r.agents << "  items: " << r.items << "\n"
            << "steps: " << r.step_count << "  (charity " << r.charity_steps << ", edge-set "
            << r.pi_steps << ", reallocation " << r.candidate_steps << ", fallback "
            << r.fallback_steps << ")\n"
            << "unallocated: " << r.unallocated_count << "\n"
            << "charity envied: " << (r.charity_envied ? "yes" : "no") << "\n"
            << "efx: " << (r.final_efx ? "yes" : "no") << "\n";
  if (r.fallback_used)
    std::cout << "fallback used: yes (" << r.fallback_steps << " of " << r.step_count
              << " steps)\n";
}

int run_verify_allocation(const efx::Profile& p, const efx::json& j) {
  efx::Allocation a =
      efx::allocation_from_json(j, p.agent_count(), p.item_count(), "allocation");
  try {
    efx::validate_allocation(p, a);
  } catch (const efx::Error& e) {
    std::cout << "FAIL not a partition: " << e.what() << "\n";
    return 1;
  }
  for (int i = 0; i < p.agent_count(); ++i)
    for (int t = 0; t < p.agent_count(); ++t)
      if (i != t && efx::strongly_envies(p, a, i, a.bundles[t])) {
        std::cout << "FAIL strong envy: agent " << i << " strongly envies agent " << t << "\n";
        return 1;
      }
  for (int i = 0; i < p.agent_count(); ++i)
    if (efx::envies(p, a, i, a.unallocated)) {
      std::cout << "FAIL charity envied: agent " << i << " prefers the unallocated pool\n";
      return 1;
    }
  std::cout << "OK: allocation is EFX and the unallocated pool is unenvied\n";
  return 0;
}

int run_verify_certificate(const efx::Profile& p, const efx::json& j) {
  efx::ParsedCertificate parsed =
      efx::certificate_from_json(j, p.agent_count(), p.item_count());
  efx::Allocation fin;
  try {
    fin = efx::replay_certificate(p, parsed.certificate);
  } catch (const efx::Error& e) {
    std::cout << "FAIL certificate replay: " << e.what() << "\n";
    return 1;
  }
  for (int i = 0; i < p.agent_count(); ++i)
    if (efx::envies(p, fin, i, fin.unallocated)) {
      std::cout << "FAIL charity envied: agent " << i
                << " prefers the unallocated pool at termination\n";
      return 1;
    }
  std::cout << "OK: certificate replays (" << parsed.certificate.steps.size()
            << " steps), final allocation EFX with unenvied pool\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EFX allocation solver with verifiable certificates"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  std::uint64_t seed = 0;
  int gn = 3, gm = 6;
  std::int64_t gmax = 20;
  std::string gclasses = "additive,unit_demand,budget_additive,multiplicative";
  bool two_type = false;
  std::string gout;
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("-n,--agents", gn, "agent count");
  gen->add_option("-m,--items", gm, "item count");
  gen->add_option("--max-value", gmax, "maximum item value");
  gen->add_option("--classes", gclasses, "comma-separated valuation classes");
  gen->add_flag("--two-type", two_type, "exactly two distinct valuations");
  gen->add_option("-o,--out", gout, "output file (default stdout)");

  // --- solve ---
  auto* solve = app.add_subcommand("solve", "Solve an instance");
  std::string solve_in, solver = "auto", cert_out, alloc_out, ordering_arg;
  bool quiet = false;
  solve->add_option("instance", solve_in, "instance JSON file")->required();
  solve->add_option("--solver", solver, "auto|n2|three|four|twotype");
  solve->add_option("--ordering", ordering_arg, "agent ordering, e.g. 2,0,1");
  solve->add_option("--cert", cert_out, "write the certificate JSON here");
  solve->add_option("--alloc", alloc_out, "write the final allocation JSON here");
  solve->add_flag("-q,--quiet", quiet, "suppress the report");

  // --- verify ---
  auto* verify = app.add_subcommand("verify", "Verify an allocation or certificate");
  std::string verify_inst, verify_target;
  verify->add_option("instance", verify_inst, "instance JSON file")->required();
  verify->add_option("target", verify_target, "allocation or certificate JSON file")->required();

  // --- brute ---
  auto* brute = app.add_subcommand("brute", "Enumerate EFX allocations by brute force");
  std::string brute_in;
  int brute_unalloc = 0;
  long long brute_limit = 20;
  bool count_only = false;
  brute->add_option("instance", brute_in, "instance JSON file")->required();
  brute->add_option("--max-unallocated", brute_unalloc, "pool size bound");
  brute->add_option("--limit", brute_limit, "print at most this many allocations");
  brute->add_flag("--count-only", count_only, "print only the count");

  // --- graph ---
  auto* graph = app.add_subcommand("graph", "Export the champion graph as DOT");
  std::string graph_in, graph_alloc, graph_out;
  std::vector<std::string> probe_args;
  bool as_dot = false;
  graph->add_option("instance", graph_in, "instance JSON file")->required();
  graph->add_option("--alloc", graph_alloc, "allocation JSON file")->required();
  graph->add_flag("--dot", as_dot, "emit Graphviz DOT (the default and only format)");
  graph->add_option("-o,--out", graph_out, "output file (default stdout)");
  graph->add_option("--edge", probe_args,
                    "probe a generalized edge, format target:items|items (names)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      efx::GenerateConfig cfg;
      cfg.seed = seed;
      cfg.agents = gn;
      cfg.items = gm;
      cfg.max_value = gmax;
      cfg.two_type = two_type;
      cfg.classes.clear();
      std::stringstream ss(gclasses);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.classes.push_back(efx::parse_kind(tok, "--classes"));
      emit(gout, efx::serialize_instance(efx::generate(cfg)) + "\n");
      return 0;
    }

    if (*solve) {
      efx::Instance inst = efx::parse_instance(read_file(solve_in));
      efx::Profile p(inst);
      efx::AgentOrdering ordering = inst.ordering;
      if (!ordering_arg.empty()) ordering = parse_int_list(ordering_arg);
      efx::SolveResult r = efx::solve_with(solver, p, ordering);
      if (!cert_out.empty()) emit(cert_out, efx::certificate_to_json(r).dump(2) + "\n");
      if (!alloc_out.empty()) emit(alloc_out, efx::allocation_to_json(r.final_alloc).dump(2) + "\n");
      if (!quiet) print_report(r.report);
      return 0;
    }

    if (*verify) {
      efx::Instance inst = efx::parse_instance(read_file(verify_inst));
      efx::Profile p(inst);
      efx::json j = efx::json::parse(read_file(verify_target));
      return j.contains("steps") ? run_verify_certificate(p, j) : run_verify_allocation(p, j);
    }

    if (*brute) {
      efx::Instance inst = efx::parse_instance(read_file(brute_in));
      efx::Profile p(inst);
      auto all = efx::oracle::enumerate_efx(p, brute_unalloc, budget_from_env());
      std::cout << "efx allocations (pool <= " << brute_unalloc << "): " << all.size() << "\n";
      if (!count_only) {
        long long shown = 0;
        for (const auto& a : all) {
          if (shown++ >= brute_limit) {
            std::cout << "... (" << all.size() - shown + 1 << " more)\n";
            break;
          }
          std::cout << efx::allocation_to_json(a).dump() << "\n";
        }
      }
      return 0;
    }

    if (*graph) {
      efx::Instance inst = efx::parse_instance(read_file(graph_in));
      efx::Profile p(inst);
      efx::json aj = efx::json::parse(read_file(graph_alloc));
      efx::Allocation a =
          efx::allocation_from_json(aj, p.agent_count(), p.item_count(), "allocation");
      efx::validate_allocation(p, a);
      efx::ChampionQuery q(p, a);
      efx::BasicGraph g = efx::build_basic_graph(p, a, q);
      std::vector<efx::ChampionEdge> edges = g.all_edges();
      for (const std::string& spec : probe_args) {
        auto colon = spec.find(':');
        auto bar = spec.find('|');
        if (colon == std::string::npos || bar == std::string::npos || bar < colon)
          throw efx::ArgumentError("--edge: expected target:items|items");
        int target = std::stoi(spec.substr(0, colon));
        efx::ItemSet h = parse_item_set(inst, spec.substr(colon + 1, bar - colon - 1));
        efx::ItemSet s = parse_item_set(inst, spec.substr(bar + 1));
        if (auto e = efx::generalized_edge(p, a, target, h, s)) edges.push_back(*e);
      }
      emit(graph_out, efx::to_dot(inst, std::move(edges)));
      return 0;
    }
  } catch (const efx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const efx::json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
