#include "comrisk/heter.hpp"

#include <cmath>

#include "comrisk/errors.hpp"
#include "comrisk/ops.hpp"
#include "comrisk/rng.hpp"

namespace comrisk {
namespace {

std::string rel_name(Relation r) { return std::string(to_string(r)); }

std::string block_prefix(std::size_t b) { return "heter." + std::to_string(b) + "."; }

void add_glorot(ParamStore& store, const std::string& name, std::size_t rows,
                std::size_t cols, std::uint64_t seed) {
  Rng rng(seed, "init/" + name);
  store.add(name, glorot_uniform(rows, cols, rng));
}

// Sum over the given relations of the mean of (x W_r) over each node's
// incoming neighbors, plus x W_self.
Var rgcn_block(Var x, const HeterGraph& graph, const BoundParams& p,
               const std::string& prefix) {
  Tape& tape = p.tape();
  Var out = ops::matmul(x, p[prefix + "rgcn.W_self"]);
  for (Relation rel : kAllRelations) {
    const RelationEdges& e = graph.relations[static_cast<std::size_t>(rel)];
    if (e.size() == 0) continue;
    std::vector<double> indeg(graph.num_nodes, 0.0);
    for (std::size_t d : e.dst) indeg[d] += 1.0;
    Tensor norm({e.size(), 1}, 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) norm[k] = 1.0 / indeg[e.dst[k]];
    Var msg = ops::gather_rows(ops::matmul(x, p[prefix + "rgcn.W." + rel_name(rel)]), e.src);
    msg = ops::mul_col(msg, tape.constant(std::move(norm)));
    out = ops::add(out, ops::segment_sum(msg, e.dst, graph.num_nodes));
  }
  return out;
}

}  // namespace

HeterGraph build_heter_graph(const EnterpriseKG& kg, const ModelConfig& cfg) {
  HeterGraph g;
  g.num_nodes = kg.num_nodes();
  g.num_enterprises = kg.num_enterprises();
  for (auto& m : g.has_neighbor) m.assign(g.num_nodes, 0);
  auto push = [&g](RelationEdges& r, std::size_t k, std::size_t s, std::size_t d,
                   const std::optional<double>& w) {
    r.src.push_back(s);
    r.dst.push_back(d);
    if (w) r.weight.push_back(*w);
    g.has_neighbor[k][d] = 1;
  };
  for (const HeteroEdge& e : kg.edges) {
    const std::size_t k = static_cast<std::size_t>(e.rel);
    RelationEdges& r = g.relations[k];
    if (e.rel == Relation::HolderInvestor && !e.weight) {
      throw DataError("holder_investor edge without weight");
    }
    push(r, k, e.src, e.dst, e.weight);
    if (!cfg.directed_relations && e.src != e.dst) push(r, k, e.dst, e.src, e.weight);
  }
  return g;
}

void add_heter_params(ParamStore& store, const ModelConfig& cfg, std::uint64_t seed) {
  const std::size_t dp = cfg.output_dim;
  for (std::size_t b = 0; b < cfg.heter_blocks; ++b) {
    const std::string pre = block_prefix(b);
    const std::size_t din = b == 0 ? cfg.input_dim : dp;
    if (cfg.heter_variant == HeterVariant::Rgcn) {
      add_glorot(store, pre + "rgcn.W_self", din, dp, seed);
      for (Relation rel : kAllRelations) {
        add_glorot(store, pre + "rgcn.W." + rel_name(rel), din, dp, seed);
      }
      continue;
    }
    for (const char* kind : {"enterprise", "person"}) {
      add_glorot(store, pre + "W_type." + kind, din, dp, seed);
      store.add(pre + "bn_gamma." + kind, Tensor({dp}, 1.0));
      store.add(pre + "bn_beta." + kind, Tensor({dp}, 0.0));
    }
    for (Relation rel : kAllRelations) {
      const std::string r = rel_name(rel);
      if (rel == Relation::HolderInvestor) {
        add_glorot(store, pre + "W2." + r, cfg.weighted_uses_projected ? dp : din, dp, seed);
      } else {
        add_glorot(store, pre + "W1." + r, 2 * dp, dp, seed);
      }
      add_glorot(store, pre + "W_Q." + r, dp, dp, seed);
      store.add(pre + "b_Q." + r, Tensor({dp}, 0.0));
      add_glorot(store, pre + "W_K." + r, dp, dp, seed);
      store.add(pre + "b_K." + r, Tensor({dp}, 0.0));
      store.add(pre + "mu." + r, Tensor::scalar(1.0));
    }
    add_glorot(store, pre + "W_V", dp, dp, seed);
    store.add(pre + "b_V", Tensor({dp}, 0.0));
    store.add(pre + "eta_res", Tensor::scalar(1.0));
  }
}

Var project_nodes(Var h, std::size_t num_enterprises, const BoundParams& p,
                  const std::string& prefix, const ModelConfig& cfg) {
  const std::size_t n = h.rows();
  Var out;
  const std::pair<const char*, std::pair<std::size_t, std::size_t>> groups[] = {
      {"enterprise", {0, num_enterprises}}, {"person", {num_enterprises, n}}};
  for (const auto& [kind, range] : groups) {
    if (range.first >= range.second) continue;
    std::vector<std::size_t> idx;
    for (std::size_t v = range.first; v < range.second; ++v) idx.push_back(v);
    const std::string k(kind);
    Var x = ops::matmul(ops::gather_rows(h, idx), p[prefix + "W_type." + k]);
    if (!cfg.bn_identity) {
      x = ops::batch_norm(x, p[prefix + "bn_gamma." + k], p[prefix + "bn_beta." + k],
                          cfg.bn_eps);
    }
    Var placed = ops::segment_sum(x, idx, n);
    out = out.valid() ? ops::add(out, placed) : placed;
  }
  return out;
}

Var entity_attend_unweighted(Var hp, const RelationEdges& edges, Var w1,
                             std::size_t num_nodes, double slope, Var* alpha_out) {
  if (edges.size() == 0) throw NumericError("entity attention over an empty relation");
  Var hd = ops::gather_rows(hp, edges.dst);
  Var hs = ops::gather_rows(hp, edges.src);
  const Var pair[] = {hd, hs};
  Var e = ops::leaky_relu(ops::matmul(ops::concat_cols(pair), w1), slope);
  Var alpha = ops::segment_softmax(e, edges.dst, num_nodes);
  if (alpha_out) *alpha_out = alpha;
  return ops::segment_sum(ops::mul(alpha, hs), edges.dst, num_nodes);
}

Var entity_attend_weighted(Var x, const RelationEdges& edges, Var w2,
                           std::size_t num_nodes, Var* eta_out) {
  if (edges.size() == 0) throw NumericError("entity attention over an empty relation");
  if (edges.weight.size() != edges.size()) {
    throw DataError("weighted relation is missing edge weights");
  }
  Tape& tape = *x.tape();
  Tensor w({edges.size(), 1}, 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) w[k] = edges.weight[k];
  Var eta = ops::segment_softmax(tape.constant(std::move(w)), edges.dst, num_nodes);
  if (eta_out) *eta_out = eta;
  Var msg = ops::gather_rows(ops::matmul(x, w2), edges.src);
  return ops::segment_sum(ops::mul_col(msg, eta), edges.dst, num_nodes);
}

Var relation_attend(Var hp, std::span<const Var> r, std::span<const Relation> rels,
                    std::span<const std::vector<unsigned char>> present,
                    const BoundParams& p, const std::string& prefix, Var* beta_out) {
  Tape& tape = p.tape();
  const std::size_t n = hp.rows(), dp = hp.cols(), K = r.size();
  if (K == 0) {
    if (beta_out) *beta_out = Var{};
    return tape.constant(Tensor({n, dp}, 0.0));
  }
  if (rels.size() != K || present.size() != K) {
    throw DimensionError("relation_attend: relation lists disagree");
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dp));
  std::vector<Var> scores;
  std::vector<unsigned char> mask(n * K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    const std::string rn = rel_name(rels[k]);
    Var q = ops::add_bias(ops::matmul(hp, p[prefix + "W_Q." + rn]), p[prefix + "b_Q." + rn]);
    Var key = ops::add_bias(ops::matmul(r[k], p[prefix + "W_K." + rn]), p[prefix + "b_K." + rn]);
    scores.push_back(ops::scale(ops::scale(ops::row_dot(q, key), p[prefix + "mu." + rn]),
                                inv_sqrt));
    for (std::size_t v = 0; v < n; ++v) mask[v * K + k] = present[k][v];
  }
  Var beta = ops::masked_softmax_rows(ops::concat_cols(scores), mask);
  if (beta_out) *beta_out = beta;
  Var out;
  for (std::size_t k = 0; k < K; ++k) {
    Var value = ops::add_bias(ops::matmul(r[k], p[prefix + "W_V"]), p[prefix + "b_V"]);
    Var term = ops::mul_col(value, ops::column(beta, k));
    out = out.valid() ? ops::add(out, term) : term;
  }
  return out;
}

Var heter_encode(Var h, const HeterGraph& graph, const BoundParams& p,
                 const ModelConfig& cfg, HeterTrace* trace) {
  if (h.rows() != graph.num_nodes) {
    throw DimensionError("heter_encode: expected " + std::to_string(graph.num_nodes) +
                         " rows, got " + std::to_string(h.rows()));
  }
  Var x = h;
  for (std::size_t b = 0; b < cfg.heter_blocks; ++b) {
    const std::string pre = block_prefix(b);
    if (cfg.heter_variant == HeterVariant::Rgcn) {
      x = ops::relu(rgcn_block(x, graph, p, pre));
      continue;
    }
    Var hp = project_nodes(x, graph.num_enterprises, p, pre, cfg);
    std::vector<Var> summaries;
    std::vector<Relation> rels;
    std::vector<std::vector<unsigned char>> present;
    if (trace) *trace = HeterTrace{};
    for (Relation rel : kAllRelations) {
      const std::size_t k = static_cast<std::size_t>(rel);
      const RelationEdges& e = graph.relations[k];
      if (e.size() == 0) continue;
      const std::string rn = rel_name(rel);
      if (rel == Relation::HolderInvestor) {
        Var src = cfg.weighted_uses_projected ? hp : x;
        summaries.push_back(entity_attend_weighted(src, e, p[pre + "W2." + rn],
                                                   graph.num_nodes,
                                                   trace ? &trace->eta : nullptr));
      } else {
        Var alpha;
        summaries.push_back(entity_attend_unweighted(hp, e, p[pre + "W1." + rn],
                                                     graph.num_nodes, cfg.leaky_slope,
                                                     &alpha));
        if (trace) {
          trace->alpha_relations.push_back(rel);
          trace->alpha.push_back(alpha);
        }
      }
      rels.push_back(rel);
      present.push_back(graph.has_neighbor[k]);
    }
    Var beta;
    Var htilde = relation_attend(hp, summaries, rels, present, p, pre, &beta);
    if (trace) {
      trace->beta = beta;
      for (std::size_t v = 0; v < graph.num_nodes; ++v) {
        for (const auto& m : present) trace->beta_mask.push_back(m[v]);
      }
    }
    x = ops::add(ops::scale(ops::gelu(hp, cfg.gelu), p[pre + "eta_res"]), htilde);
  }
  return x;
}

}  // namespace comrisk
