#include "comrisk/model.hpp"

#include "comrisk/errors.hpp"
#include "comrisk/ops.hpp"
#include "comrisk/rng.hpp"

namespace comrisk {
namespace {

void add_glorot(ParamStore& store, const std::string& name, std::size_t rows,
                std::size_t cols, std::uint64_t seed) {
  Rng rng(seed, "init/" + name);
  store.add(name, glorot_uniform(rows, cols, rng));
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

ModelInputs prepare_model_inputs(const EnterpriseKG& kg, const ModelConfig& cfg,
                                 const EmbeddingMap* embeddings) {
  cfg.validate();
  ModelInputs in;
  in.intra = prepare_intra_inputs(kg, cfg, embeddings);
  in.hyper = build_hypergraph(kg, cfg);
  in.heter = build_heter_graph(kg, cfg);
  in.labels.reserve(kg.num_enterprises());
  for (const Enterprise& e : kg.enterprises) in.labels.push_back(e.label ? *e.label : -1);
  return in;
}

ParamStore init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore store;
  add_intra_params(store, cfg, seed);
  add_hyper_params(store, cfg, seed);
  add_heter_params(store, cfg, seed);
  const std::size_t dp = cfg.output_dim;
  const std::size_t mlp_in = cfg.fusion_mlp_input == FusionMlpInput::Intra ? cfg.input_dim : dp;
  add_glorot(store, "fusion.W_cont", dp, dp, seed);
  store.add("fusion.lambda_raw", Tensor::scalar(0.0));
  add_glorot(store, "fusion.mlp.W1", mlp_in, cfg.mlp_width(), seed);
  store.add("fusion.mlp.b1", Tensor({cfg.mlp_width()}, 0.0));
  add_glorot(store, "fusion.mlp.W2", cfg.mlp_width(), dp, seed);
  store.add("fusion.mlp.b2", Tensor({dp}, 0.0));
  add_glorot(store, "predict.W_p", dp, 2, seed);
  store.add("predict.b_p", Tensor({2}, 0.0));
  return store;
}

Var fuse(Var z, Var zhat, Var mlp_input, const BoundParams& p, const ModelConfig& cfg) {
  Var zc = ops::matmul(ops::add(z, zhat), p["fusion.W_cont"]);
  Var raw = p["fusion.lambda_raw"];
  Var lambda = ops::sigmoid(raw);
  Var one_minus = ops::sigmoid(ops::scale(raw, -1.0));
  Var hidden = ops::relu(
      ops::add_bias(ops::matmul(mlp_input, p["fusion.mlp.W1"]), p["fusion.mlp.b1"]));
  Var mlp = ops::add_bias(ops::matmul(hidden, p["fusion.mlp.W2"]), p["fusion.mlp.b2"]);
  return ops::add(ops::scale(ops::gelu(zc, cfg.gelu), lambda), ops::scale(mlp, one_minus));
}

Var predict(Var zbar, const BoundParams& p) {
  return ops::softmax_rows(
      ops::add_bias(ops::matmul(zbar, p["predict.W_p"]), p["predict.b_p"]));
}

Var nll_loss(Var probs, std::span<const std::size_t> nodes, std::span<const int> labels,
             std::array<double, 2> class_weights) {
  if (nodes.empty()) throw DataError("loss over an empty node set");
  std::vector<std::size_t> cols;
  std::vector<double> w;
  for (std::size_t i : nodes) {
    if (i >= labels.size() || (labels[i] != 0 && labels[i] != 1)) {
      throw DataError("loss node " + std::to_string(i) + " has no label");
    }
    cols.push_back(static_cast<std::size_t>(labels[i]));
    w.push_back(-class_weights[static_cast<std::size_t>(labels[i])]);
  }
  return ops::weighted_sum(ops::log_clamped(ops::pick(probs, nodes, cols), 1e-12), w);
}

ForwardResult forward(const ModelInputs& in, const BoundParams& p, const ModelConfig& cfg) {
  Tape& tape = p.tape();
  const std::size_t E = in.num_enterprises();
  const std::vector<std::size_t> ent = iota(E);
  ForwardResult r;
  r.h = encode_intra(in.intra, p, cfg, cfg.ablation == Ablation::NoIntra);
  Var h_ent = ops::gather_rows(r.h, ent);

  if (cfg.ablation == Ablation::NoHyper) {
    r.z = tape.constant(Tensor({E, cfg.output_dim}, 0.0));
  } else {
    r.z = hyper_encode(h_ent, in.hyper, p, cfg);
  }
  if (cfg.ablation == Ablation::NoHeter) {
    r.zhat = tape.constant(Tensor({in.intra.num_nodes, cfg.output_dim}, 0.0));
  } else {
    r.zhat = heter_encode(r.h, in.heter, p, cfg, &r.heter);
  }
  Var zhat_ent = ops::gather_rows(r.zhat, ent);
  Var mlp_in = cfg.fusion_mlp_input == FusionMlpInput::Intra ? h_ent : zhat_ent;
  r.zbar = fuse(r.z, zhat_ent, mlp_in, p, cfg);
  r.probs = predict(r.zbar, p);
  return r;
}

std::vector<double> predict_scores(const ParamStore& params, const ModelInputs& in,
                                   const ModelConfig& cfg) {
  Tape tape;
  BoundParams p(tape, params);
  ForwardResult r = forward(in, p, cfg);
  const Tensor& probs = r.probs.value();
  std::vector<double> s(probs.rows());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = probs.at(i, 1);
  return s;
}

}  // namespace comrisk
