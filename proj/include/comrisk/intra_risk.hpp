#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "comrisk/config.hpp"
#include "comrisk/ekg.hpp"
#include "comrisk/ekg_io.hpp"
#include "comrisk/features.hpp"
#include "comrisk/params.hpp"

namespace comrisk {

/// Widths of the cause, court and verdict blocks of a lawsuit embedding.
struct LawsuitWidths {
  std::size_t cause = 0;
  std::size_t court = 0;
  std::size_t verdict = 0;
  std::size_t total() const { return cause + court + verdict; }
};

/// Splits `lawsuit_dim` as court = verdict = floor(3 d / 10) and cause the
/// rest; 20 gives (8, 6, 6).
LawsuitWidths lawsuit_widths(std::size_t lawsuit_dim);

/// 1 / (1 + w delta) with w = w_recent for delta <= 24 months, else w_old.
/// Throws NumericError for a negative delta.
double time_decay(double delta_months, double w_recent, double w_old);

/// Every visible lawsuit of a graph in flat form, ordered by enterprise and
/// then by file order.
struct LawsuitBatch {
  std::vector<std::size_t> owner;  // enterprise index
  std::vector<std::size_t> cause;
  std::vector<std::size_t> court;
  std::vector<std::size_t> verdict;
  std::vector<double> delta_months;
  std::size_t size() const { return owner.size(); }
};

/// Lawsuits dated after their enterprise's observation time are skipped.
LawsuitBatch collect_lawsuits(const EnterpriseKG& kg);

/// Column statistics of log1p-transformed values.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // 1 where the column is constant
};

/// Everything the intra-risk encoder reads, for all nodes of one graph.
struct IntraInputs {
  std::size_t num_enterprises = 0;
  std::size_t num_nodes = 0;
  Tensor attrs;       // [N x 3], log1p then z-scored; zero rows for persons
  Tensor frequency;   // [N x 12], attributes as above, counts log1p
  Tensor supplement;  // [N x supplement_dim]
  LawsuitBatch lawsuits;
  Standardizer attr_stats;
};

/// Standardization statistics come from the training split (all enterprises
/// when the split is empty). Supplement vectors are taken from `embeddings`
/// when present and otherwise drawn from N(0, 1) seeded by the node id.
IntraInputs prepare_intra_inputs(const EnterpriseKG& kg, const ModelConfig& cfg,
                                 const EmbeddingMap* embeddings = nullptr);

/// Deterministic stand-in supplement vector for a node id.
std::vector<double> synthetic_supplement(const std::string& node_id, std::size_t dim);

/// Registers intra.cause_table, intra.court_table, intra.verdict_table,
/// intra.W_risk, intra.W_e (and intra.W_freq, intra.w_recent, intra.w_old
/// when the configuration uses them).
void add_intra_params(ParamStore& store, const ModelConfig& cfg,
                      std::uint64_t seed);

/// [cause_vec | court_vec | verdict_vec] for each lawsuit, [K x d~].
Var embed_lawsuits(const LawsuitBatch& batch, const BoundParams& p);

/// Decay weights as a [K x 1] column.
Var decay_weights(const LawsuitBatch& batch, const BoundParams& p,
                  const ModelConfig& cfg);

/// h^r for every node: sum_k g_k W_risk s_k, [N x d]. Persons and
/// enterprises without lawsuits get zero rows.
Var aggregate_lawsuits(const IntraInputs& in, const BoundParams& p,
                       const ModelConfig& cfg);

/// h = W_e [b | h^r | u] for every node, [N x d]. With `supplement_only`
/// the attribute and lawsuit blocks are zeroed.
Var encode_intra(const IntraInputs& in, const BoundParams& p,
                 const ModelConfig& cfg, bool supplement_only = false);

}  // namespace comrisk
