#include "comrisk/intra_risk.hpp"

#include <algorithm>
#include <cmath>

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

std::size_t attr_input_width() { return 3; }

}  // namespace

LawsuitWidths lawsuit_widths(std::size_t lawsuit_dim) {
  if (lawsuit_dim < 3) throw ConfigError("lawsuit_dim must be at least 3");
  LawsuitWidths w;
  w.court = std::max<std::size_t>(1, 3 * lawsuit_dim / 10);
  w.verdict = w.court;
  w.cause = lawsuit_dim - w.court - w.verdict;
  return w;
}

double time_decay(double delta_months, double w_recent, double w_old) {
  if (!(delta_months >= 0.0)) throw NumericError("time_decay: negative interval");
  const double w = delta_months <= static_cast<double>(kRecentMonths) ? w_recent : w_old;
  return 1.0 / (1.0 + w * delta_months);
}

LawsuitBatch collect_lawsuits(const EnterpriseKG& kg) {
  LawsuitBatch b;
  for (std::size_t i = 0; i < kg.num_enterprises(); ++i) {
    const Date obs = kg.observation_time(i);
    for (const Lawsuit& l : kg.enterprises[i].lawsuits) {
      if (l.date > obs) continue;
      b.owner.push_back(i);
      b.cause.push_back(static_cast<std::size_t>(l.cause.kind));
      b.court.push_back(static_cast<std::size_t>(l.court));
      b.verdict.push_back(static_cast<std::size_t>(l.verdict));
      b.delta_months.push_back(static_cast<double>(months_between(l.date, obs)));
    }
  }
  return b;
}

std::vector<double> synthetic_supplement(const std::string& node_id, std::size_t dim) {
  Rng rng(fnv1a64(node_id), "supplement");
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

IntraInputs prepare_intra_inputs(const EnterpriseKG& kg, const ModelConfig& cfg,
                                 const EmbeddingMap* embeddings) {
  IntraInputs in;
  const std::size_t E = kg.num_enterprises(), N = kg.num_nodes();
  in.num_enterprises = E;
  in.num_nodes = N;

  FeatureTable table = extract_lawsuit_features(kg);
  std::vector<std::size_t> fit_rows = kg.splits.train;
  if (fit_rows.empty()) {
    for (std::size_t i = 0; i < E; ++i) fit_rows.push_back(i);
  }
  in.attr_stats.mean.assign(3, 0.0);
  in.attr_stats.stddev.assign(3, 1.0);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0.0;
    for (std::size_t i : fit_rows) s += std::log1p(table.rows[i][c]);
    const double mean = fit_rows.empty() ? 0.0 : s / static_cast<double>(fit_rows.size());
    double ss = 0.0;
    for (std::size_t i : fit_rows) {
      const double d = std::log1p(table.rows[i][c]) - mean;
      ss += d * d;
    }
    const double sd = fit_rows.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(fit_rows.size()));
    in.attr_stats.mean[c] = mean;
    in.attr_stats.stddev[c] = sd > 0.0 ? sd : 1.0;
  }

  in.attrs = Tensor({N, attr_input_width()}, 0.0);
  in.frequency = Tensor({N, kFeatureCount}, 0.0);
  for (std::size_t i = 0; i < E; ++i) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const double x = std::log1p(table.rows[i][c]);
      if (c < 3) {
        const double z = (x - in.attr_stats.mean[c]) / in.attr_stats.stddev[c];
        in.attrs.at(i, c) = z;
        in.frequency.at(i, c) = z;
      } else {
        in.frequency.at(i, c) = x;
      }
    }
  }

  in.supplement = Tensor({N, cfg.supplement_dim}, 0.0);
  for (std::size_t v = 0; v < N; ++v) {
    const std::string& id = kg.node_id(v);
    std::vector<double> u;
    if (embeddings) {
      auto it = embeddings->find(id);
      if (it != embeddings->end()) {
        if (it->second.size() != cfg.supplement_dim) {
          throw DimensionError("embedding for " + id + " has width " +
                               std::to_string(it->second.size()) + ", expected " +
                               std::to_string(cfg.supplement_dim));
        }
        u = it->second;
      }
    }
    if (u.empty()) u = synthetic_supplement(id, cfg.supplement_dim);
    for (std::size_t k = 0; k < cfg.supplement_dim; ++k) in.supplement.at(v, k) = u[k];
  }

  in.lawsuits = collect_lawsuits(kg);
  return in;
}

void add_intra_params(ParamStore& store, const ModelConfig& cfg, std::uint64_t seed) {
  const LawsuitWidths w = lawsuit_widths(cfg.lawsuit_dim);
  const std::size_t d = cfg.input_dim;
  if (cfg.intra_variant == IntraVariant::RiskFrequency) {
    add_glorot(store, "intra.W_freq", kFeatureCount + cfg.supplement_dim, d, seed);
    return;
  }
  add_glorot(store, "intra.cause_table", kCauseCount, w.cause, seed);
  add_glorot(store, "intra.court_table", kCourtCount, w.court, seed);
  add_glorot(store, "intra.verdict_table", kVerdictCount, w.verdict, seed);
  add_glorot(store, "intra.W_risk", w.total(), d, seed);
  add_glorot(store, "intra.W_e", attr_input_width() + d + cfg.supplement_dim, d, seed);
  if (cfg.decay_trainable) {
    store.add("intra.w_recent", Tensor::scalar(cfg.decay_recent));
    store.add("intra.w_old", Tensor::scalar(cfg.decay_old));
  }
}

Var embed_lawsuits(const LawsuitBatch& batch, const BoundParams& p) {
  const Var parts[] = {ops::gather_rows(p["intra.cause_table"], batch.cause),
                       ops::gather_rows(p["intra.court_table"], batch.court),
                       ops::gather_rows(p["intra.verdict_table"], batch.verdict)};
  return ops::concat_cols(parts);
}

Var decay_weights(const LawsuitBatch& batch, const BoundParams& p,
                  const ModelConfig& cfg) {
  Tape& tape = p.tape();
  const std::size_t K = batch.size();
  if (!cfg.decay_trainable) {
    Tensor g({K, 1}, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      g[k] = time_decay(batch.delta_months[k], cfg.decay_recent, cfg.decay_old);
    }
    return tape.constant(std::move(g));
  }
  Tensor recent({K, 1}, 0.0), old({K, 1}, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double dm = batch.delta_months[k];
    if (dm < 0.0) throw NumericError("decay_weights: negative interval");
    (dm <= static_cast<double>(kRecentMonths) ? recent : old)[k] = dm;
  }
  Var wd = ops::add(ops::scale(tape.constant(std::move(recent)), p["intra.w_recent"]),
                    ops::scale(tape.constant(std::move(old)), p["intra.w_old"]));
  return ops::reciprocal(ops::add_scalar(wd, 1.0));
}

Var aggregate_lawsuits(const IntraInputs& in, const BoundParams& p,
                       const ModelConfig& cfg) {
  Tape& tape = p.tape();
  if (in.lawsuits.size() == 0) {
    return tape.constant(Tensor({in.num_nodes, cfg.input_dim}, 0.0));
  }
  Var s = embed_lawsuits(in.lawsuits, p);
  Var weighted = ops::mul_col(s, decay_weights(in.lawsuits, p, cfg));
  Var pooled = ops::segment_sum(weighted, in.lawsuits.owner, in.num_nodes);
  return ops::matmul(pooled, p["intra.W_risk"]);
}

Var encode_intra(const IntraInputs& in, const BoundParams& p, const ModelConfig& cfg,
                 bool supplement_only) {
  Tape& tape = p.tape();
  Var u = tape.constant(in.supplement);
  if (cfg.intra_variant == IntraVariant::RiskFrequency) {
    Tensor freq = in.frequency;
    if (supplement_only) freq.fill(0.0);
    const Var parts[] = {tape.constant(std::move(freq)), u};
    return ops::matmul(ops::concat_cols(parts), p["intra.W_freq"]);
  }
  Var b, hr;
  if (supplement_only) {
    b = tape.constant(Tensor({in.num_nodes, attr_input_width()}, 0.0));
    hr = tape.constant(Tensor({in.num_nodes, cfg.input_dim}, 0.0));
  } else {
    b = tape.constant(in.attrs);
    hr = aggregate_lawsuits(in, p, cfg);
  }
  if (hr.cols() != cfg.input_dim || u.cols() != cfg.supplement_dim) {
    throw DimensionError("encode_intra: block widths disagree with W_e");
  }
  const Var parts[] = {b, hr, u};
  return ops::matmul(ops::concat_cols(parts), p["intra.W_e"]);
}

}  // namespace comrisk
