#include "comrisk/incidence.hpp"

#include <algorithm>

namespace comrisk {

double IncidenceMatrix::at(std::size_t v, std::size_t hp) const {
  const auto& m = members.at(hp);
  return std::binary_search(m.begin(), m.end(), v) ? 1.0 : 0.0;
}

Tensor IncidenceMatrix::to_dense() const {
  Tensor h({rows, cols}, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t v : members[c]) h.at(v, c) = 1.0;
  }
  return h;
}

IncidenceMatrix build_incidence(
    std::size_t num_nodes, const std::vector<std::vector<std::size_t>>& hyperedges) {
  IncidenceMatrix inc;
  inc.rows = num_nodes;
  inc.cols = hyperedges.size();
  inc.node_degree.assign(num_nodes, 0.0);
  inc.isolated.assign(num_nodes, true);
  for (const auto& he : hyperedges) {
    std::vector<std::size_t> m = he;
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    if (m.empty()) throw DataError("hyperedge without members");
    for (std::size_t v : m) {
      if (v >= num_nodes) throw DataError("hyperedge member out of range");
      inc.node_degree[v] += 1.0;
      inc.isolated[v] = false;
    }
    inc.edge_degree.push_back(static_cast<double>(m.size()));
    inc.members.push_back(std::move(m));
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    if (inc.isolated[v]) inc.node_degree[v] = 1.0;
  }
  return inc;
}

IncidenceMatrix build_incidence(const EnterpriseKG& kg, HyperedgeType type) {
  std::vector<std::vector<std::size_t>> edges;
  for (const Hyperedge& h : kg.hyperedges) {
    if (h.type == type) edges.push_back(h.members);
  }
  if (edges.empty()) {
    throw EmptyHyperedgeTypeError("no hyperedges of type " +
                                  std::string(to_string(type)));
  }
  return build_incidence(kg.num_enterprises(), edges);
}

}  // namespace comrisk
