#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "comrisk/config.hpp"
#include "comrisk/ekg.hpp"
#include "comrisk/ekg_io.hpp"
#include "comrisk/heter.hpp"
#include "comrisk/hyper.hpp"
#include "comrisk/intra_risk.hpp"
#include "comrisk/params.hpp"

namespace comrisk {

/// Graph-derived inputs of the model; built once per graph and reused by
/// every forward pass.
struct ModelInputs {
  IntraInputs intra;
  HyperGraph hyper;
  HeterGraph heter;
  std::vector<int> labels;  // per enterprise; -1 when unlabeled
  std::size_t num_enterprises() const { return intra.num_enterprises; }
};

ModelInputs prepare_model_inputs(const EnterpriseKG& kg, const ModelConfig& cfg,
                                 const EmbeddingMap* embeddings = nullptr);

/// Every trainable tensor, initialized from named streams of `seed`.
ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed);

/// z^cont = (z + z^) W_cont;
/// z_bar = lambda GELU(z^cont) + (1 - lambda) MLP(m), lambda = logistic(lambda_raw).
Var fuse(Var z, Var zhat, Var mlp_input, const BoundParams& p, const ModelConfig& cfg);

/// Row-wise softmax(z_bar W_p + b_p); column 0 survive, column 1 bankrupt.
Var predict(Var zbar, const BoundParams& p);

/// -sum_i w[y_i] log(max(p_i[y_i], 1e-12)) over `nodes`.
Var nll_loss(Var probs, std::span<const std::size_t> nodes, std::span<const int> labels,
             std::array<double, 2> class_weights);

struct ForwardResult {
  Var h;      // intra-risk, all nodes [N x d]
  Var z;      // hypergraph branch, enterprises [E x d']
  Var zhat;   // heterogeneous branch, all nodes [N x d']
  Var zbar;   // fused, enterprises [E x d']
  Var probs;  // enterprises [E x 2]
  HeterTrace heter;
};

/// intra -> (hyper, heter) -> fuse -> predict. Ablations replace the
/// dropped branch by zeros (or, for no_intra, by the supplement-only
/// encoding).
ForwardResult forward(const ModelInputs& in, const BoundParams& p, const ModelConfig& cfg);

/// Bankrupt-class probability of every enterprise.
std::vector<double> predict_scores(const ParamStore& params, const ModelInputs& in,
                                   const ModelConfig& cfg);

}  // namespace comrisk
