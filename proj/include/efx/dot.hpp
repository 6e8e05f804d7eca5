#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "efx/champion.hpp"
#include "efx/instance.hpp"

namespace efx {

/// Graphviz export of a champion graph. Envy edges are solid, basic
/// champion edges dashed and labeled with their pool item, generalized
/// edges dotted and labeled "H|S". Node and edge order is deterministic
/// so exports are golden-file stable.
inline std::string to_dot(const Instance& inst, std::vector<ChampionEdge> edges) {
  auto set_label = [&](ItemSet s) {
    std::string out = "{";
    bool first = true;
    for (int i : s) {
      if (!first) out += ",";
      out += inst.item_name(i);
      first = false;
    }
    return out + "}";
  };
  std::sort(edges.begin(), edges.end(), [](const ChampionEdge& a, const ChampionEdge& b) {
    return std::tuple(a.kind, a.source, a.target, a.added.bits(), a.freed.bits(), a.discard.bits()) <
           std::tuple(b.kind, b.source, b.target, b.added.bits(), b.freed.bits(), b.discard.bits());
  });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::ostringstream out;
  out << "digraph championship {\n  rankdir=LR;\n";
  for (int i = 0; i < inst.agent_count(); ++i)
    out << "  a" << i << " [label=\"" << inst.agent_name(i) << "\"];\n";
  for (const ChampionEdge& e : edges) {
    out << "  a" << e.source << " -> a" << e.target;
    switch (e.kind) {
      case EdgeKind::envy:
        out << " [style=solid]";
        break;
      case EdgeKind::champion:
        out << " [style=dashed, label=\"" << inst.item_name(e.added.lowest()) << "\"]";
        break;
      case EdgeKind::generalized:
        out << " [style=dotted, label=\"" << set_label(e.added) << "|" << set_label(e.freed)
            << "\"]";
        break;
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace efx
