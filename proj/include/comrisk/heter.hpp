#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "comrisk/config.hpp"
#include "comrisk/ekg.hpp"
#include "comrisk/params.hpp"

namespace comrisk {

/// Messages of one relation: node src[e] sends to node dst[e].
struct RelationEdges {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::vector<double> weight;  // holder_investor only
  std::size_t size() const { return src.size(); }
};

struct HeterGraph {
  std::size_t num_nodes = 0;
  std::size_t num_enterprises = 0;
  std::array<RelationEdges, kRelationCount> relations;
  /// has_neighbor[k][v]: node v receives at least one message under
  /// relation k.
  std::array<std::vector<unsigned char>, kRelationCount> has_neighbor;
};

/// Each edge sends messages both ways unless `directed_relations` is set.
HeterGraph build_heter_graph(const EnterpriseKG& kg, const ModelConfig& cfg);

/// Registers the parameters of every block under "heter.<block>.".
void add_heter_params(ParamStore& store, const ModelConfig& cfg, std::uint64_t seed);

/// h' = Norm(h W_type) with one map and one normalization group per node
/// kind. Enterprises occupy rows [0, num_enterprises).
Var project_nodes(Var h, std::size_t num_enterprises, const BoundParams& p,
                  const std::string& prefix, const ModelConfig& cfg);

/// Dimension-wise attention over the neighbors of every node:
/// e = LeakyReLU([h'_dst | h'_src] W1), alpha = softmax over each node's
/// incoming edges per coordinate, r = sum alpha * h'_src. Nodes without
/// neighbors get zero rows. `alpha_out` receives the [edges x d'] weights.
Var entity_attend_unweighted(Var hp, const RelationEdges& edges, Var w1,
                             std::size_t num_nodes, double slope,
                             Var* alpha_out = nullptr);

/// eta = softmax of the edge weights over each node's incoming edges,
/// r = sum eta * (x W2)_src. `eta_out` receives the [edges x 1] weights.
Var entity_attend_weighted(Var x, const RelationEdges& edges, Var w2,
                           std::size_t num_nodes, Var* eta_out = nullptr);

/// Relation-level attention. `r` holds one [N x d'] summary per relation in
/// `rels`; `present[k][v]` marks relations with neighbors. Scores
/// g = <h'W_Q + b_Q, rW_K + b_K> mu / sqrt(d') are normalized over the
/// relations present at each node, and the result is
/// sum beta_k (r_k W_V + b_V). Nodes with no relation get zero rows.
Var relation_attend(Var hp, std::span<const Var> r, std::span<const Relation> rels,
                    std::span<const std::vector<unsigned char>> present,
                    const BoundParams& p, const std::string& prefix,
                    Var* beta_out = nullptr);

/// Attention weights of the last forward pass, for inspection.
struct HeterTrace {
  std::vector<Relation> alpha_relations;
  std::vector<Var> alpha;
  Var eta;
  Var beta;
  std::vector<unsigned char> beta_mask;
};

/// All blocks: projection, entity-level and relation-level attention, then
/// z^ = eta_res * GELU(h') + h~. Returns [N x d'] for every node.
Var heter_encode(Var h, const HeterGraph& graph, const BoundParams& p,
                 const ModelConfig& cfg, HeterTrace* trace = nullptr);

}  // namespace comrisk
