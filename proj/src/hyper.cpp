#include "comrisk/hyper.hpp"

#include <cmath>
#include <iostream>

#include "comrisk/errors.hpp"
#include "comrisk/ops.hpp"
#include "comrisk/rng.hpp"

namespace comrisk {
namespace {

std::vector<CsrMatrix::Triplet> theta_triplets(const IncidenceMatrix& inc,
                                               std::span<const double> edge_weights) {
  if (!edge_weights.empty() && edge_weights.size() != inc.cols) {
    throw DimensionError("hyperedge weight count " + std::to_string(edge_weights.size()) +
                         " differs from hyperedge count " + std::to_string(inc.cols));
  }
  std::vector<double> inv_sqrt(inc.rows);
  for (std::size_t v = 0; v < inc.rows; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(inc.node_degree[v]);
  }
  std::vector<CsrMatrix::Triplet> t;
  for (std::size_t e = 0; e < inc.cols; ++e) {
    const double w = (edge_weights.empty() ? 1.0 : edge_weights[e]) / inc.edge_degree[e];
    const auto& m = inc.members[e];
    for (std::size_t u : m) {
      for (std::size_t v : m) t.push_back({u, v, w * inv_sqrt[u] * inv_sqrt[v]});
    }
  }
  return t;
}

}  // namespace

Tensor build_theta(const IncidenceMatrix& inc, std::span<const double> edge_weights) {
  return CsrMatrix::from_triplets(inc.rows, inc.rows, theta_triplets(inc, edge_weights))
      .to_dense();
}

CsrMatrix propagation_operator(const IncidenceMatrix& inc, ConvForm form,
                               std::span<const double> edge_weights) {
  std::vector<CsrMatrix::Triplet> t = theta_triplets(inc, edge_weights);
  if (form == ConvForm::Laplacian) {
    for (auto& x : t) x.value = -x.value;
    for (std::size_t v = 0; v < inc.rows; ++v) t.push_back({v, v, 1.0});
  }
  return CsrMatrix::from_triplets(inc.rows, inc.rows, std::move(t));
}

Var hyper_conv_layer(Var x, const CsrMatrix& op, Var w) {
  if (op.cols != x.rows()) {
    throw DimensionError("hyper_conv_layer: operator has " + std::to_string(op.cols) +
                         " columns but input has " + std::to_string(x.rows()) + " rows");
  }
  return ops::spmm(op, ops::matmul(x, w));
}

HyperGraph build_hypergraph(const EnterpriseKG& kg, const ModelConfig& cfg) {
  HyperGraph g;
  if (cfg.hyper_variant == HyperVariant::Hgnn) {
    std::vector<std::vector<std::size_t>> all;
    for (const Hyperedge& h : kg.hyperedges) all.push_back(h.members);
    g.merged = true;
    if (!all.empty()) {
      g.operators.push_back(propagation_operator(
          build_incidence(kg.num_enterprises(), all), ConvForm::Classical));
    }
  } else {
    for (HyperedgeType type : kAllHyperedgeTypes) {
      try {
        IncidenceMatrix inc = build_incidence(kg, type);
        g.operators.push_back(propagation_operator(inc, cfg.conv_form));
        g.types.push_back(type);
      } catch (const EmptyHyperedgeTypeError&) {
      }
    }
  }
  if (g.empty()) {
    std::cerr << "warning: graph has no hyperedges; the hypergraph branch contributes zeros\n";
  }
  return g;
}

void add_hyper_params(ParamStore& store, const ModelConfig& cfg, std::uint64_t seed) {
  std::size_t in = cfg.input_dim;
  for (std::size_t l = 0; l < cfg.hyper_layers; ++l) {
    const std::string name = "hyper.W_hp." + std::to_string(l);
    Rng rng(seed, "init/" + name);
    store.add(name, glorot_uniform(in, cfg.output_dim, rng));
    in = cfg.output_dim;
  }
  if (cfg.hyper_variant == HyperVariant::Typed) {
    for (HyperedgeType t : kAllHyperedgeTypes) {
      store.add("hyper.epsilon." + std::string(to_string(t)),
                Tensor::scalar(1.0 / static_cast<double>(kHyperedgeTypeCount)));
    }
  }
}

Var hyper_encode(Var h, const HyperGraph& graph, const BoundParams& p,
                 const ModelConfig& cfg) {
  Tape& tape = p.tape();
  if (graph.empty()) return tape.constant(Tensor({h.rows(), cfg.output_dim}, 0.0));
  Var z;
  for (std::size_t m = 0; m < graph.operators.size(); ++m) {
    Var x = h;
    for (std::size_t l = 0; l < cfg.hyper_layers; ++l) {
      x = hyper_conv_layer(x, graph.operators[m], p["hyper.W_hp." + std::to_string(l)]);
      if (cfg.hyper_activation && l + 1 < cfg.hyper_layers) x = ops::gelu(x, cfg.gelu);
    }
    if (graph.merged) return x;
    Var term = ops::scale(x, p["hyper.epsilon." + std::string(to_string(graph.types[m]))]);
    z = z.valid() ? ops::add(z, term) : term;
  }
  return z;
}

}  // namespace comrisk
