#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "comrisk/config.hpp"
#include "comrisk/ekg.hpp"
#include "comrisk/incidence.hpp"
#include "comrisk/params.hpp"
#include "comrisk/sparse.hpp"

namespace comrisk {

/// Theta = Dv^-1/2 H W De^-1 H^T Dv^-1/2 as a dense n x n matrix. An empty
/// `edge_weights` means W = I. Rows and columns of isolated nodes are zero.
Tensor build_theta(const IncidenceMatrix& inc, std::span<const double> edge_weights = {});

/// Sparse propagation operator: I - Theta for ConvForm::Laplacian, Theta for
/// ConvForm::Classical.
CsrMatrix propagation_operator(const IncidenceMatrix& inc, ConvForm form,
                               std::span<const double> edge_weights = {});

/// One layer: op * (x W).
Var hyper_conv_layer(Var x, const CsrMatrix& op, Var w);

/// Propagation operators of the hyperedge types present in a graph, in
/// enum order. The merged variant holds a single untyped operator.
struct HyperGraph {
  std::vector<HyperedgeType> types;
  std::vector<CsrMatrix> operators;
  bool merged = false;
  bool empty() const { return operators.empty(); }
};

HyperGraph build_hypergraph(const EnterpriseKG& kg, const ModelConfig& cfg);

/// hyper.W_hp.<l> for every layer and hyper.epsilon.<type> for every
/// hyperedge type (initialized to 1/3).
void add_hyper_params(ParamStore& store, const ModelConfig& cfg, std::uint64_t seed);

/// z = sum_m epsilon_m X_m^L with X_m^0 = h. GELU between layers when
/// enabled. Returns zeros (and warns once) when the graph has no hyperedges.
Var hyper_encode(Var h, const HyperGraph& graph, const BoundParams& p,
                 const ModelConfig& cfg);

}  // namespace comrisk
