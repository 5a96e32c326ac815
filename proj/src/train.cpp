#include "comrisk/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "comrisk/errors.hpp"
#include "comrisk/optim.hpp"

namespace comrisk {
namespace {

constexpr const char* kCheckpointFormat = "comrisk-checkpoint";
constexpr int kCheckpointVersion = 1;

std::vector<int> labels_of(const ModelInputs& in, std::span<const std::size_t> nodes) {
  std::vector<int> y;
  y.reserve(nodes.size());
  for (std::size_t i : nodes) y.push_back(in.labels.at(i));
  return y;
}

}  // namespace

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + s + "' (expected train, val or test)");
}

const std::vector<std::size_t>& split_nodes(const EnterpriseKG& kg, Split split) {
  switch (split) {
    case Split::Train: return kg.splits.train;
    case Split::Val: return kg.splits.val;
    case Split::Test: return kg.splits.test;
  }
  return kg.splits.test;
}

std::array<double, 2> resolve_class_weights(const EnterpriseKG& kg, const TrainConfig& config) {
  std::array<double, 2> w = config.loss_weights;
  if (config.balance_loss) {
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i : kg.splits.train) {
      (*kg.enterprises[i].label == 1 ? n1 : n0) += 1.0;
    }
    if (n0 == 0.0 || n1 == 0.0) {
      throw DataError("loss balancing needs both classes in the training split");
    }
    w[1] = n0 / n1;
  }
  return w;
}

MetricsReport evaluate(const ParamStore& params, const ModelInputs& in,
                       const ModelConfig& cfg, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw DataError("evaluation split is empty");
  const std::vector<double> all = predict_scores(params, in, cfg);
  std::vector<double> s;
  for (std::size_t i : nodes) s.push_back(all.at(i));
  return compute_metrics(s, labels_of(in, nodes));
}

MetricsReport evaluate(const ParamStore& params, const EnterpriseKG& kg,
                       const ModelConfig& cfg, Split split, const EmbeddingMap* embeddings) {
  const ModelInputs in = prepare_model_inputs(kg, cfg, embeddings);
  return evaluate(params, in, cfg, split_nodes(kg, split));
}

TrainResult train(const EnterpriseKG& kg, const TrainConfig& config,
                  const EmbeddingMap* embeddings, const EpochCallback& on_epoch) {
  config.validate();
  if (kg.splits.train.empty()) throw DataError("training split is empty");
  if (kg.splits.val.empty()) throw DataError("validation split is empty");
  const ModelConfig& cfg = config.model;
  const ModelInputs in = prepare_model_inputs(kg, cfg, embeddings);

  TrainResult result;
  result.config = config;
  result.class_weights = resolve_class_weights(kg, config);
  ParamStore params = init_params(cfg, config.seed);
  AdamState adam(params, AdamConfig{config.lr_max});

  const std::vector<int> train_y = labels_of(in, kg.splits.train);
  const std::vector<int> val_y = labels_of(in, kg.splits.val);
  result.params = params;
  result.best_val_score = -1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochLog row;
    row.epoch = epoch;
    row.lr = cosine_annealing_lr(epoch, config.epochs, config.lr_max, config.lr_min);

    Tape tape;
    BoundParams p(tape, params);
    Var loss;
    ForwardResult fwd;
    try {
      fwd = forward(in, p, cfg);
      loss = nll_loss(fwd.probs, kg.splits.train, in.labels, result.class_weights);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    row.loss = loss.value().item();

    const Tensor& probs = fwd.probs.value();
    std::vector<double> ts, vs;
    for (std::size_t i : kg.splits.train) ts.push_back(probs.at(i, 1));
    for (std::size_t i : kg.splits.val) vs.push_back(probs.at(i, 1));
    row.train_accuracy = compute_metrics(ts, train_y).accuracy;
    const MetricsReport vm = compute_metrics(vs, val_y);
    row.val_accuracy = vm.accuracy;
    row.val_f1 = vm.f1;
    row.val_auc = vm.auc;
    row.val_score = 0.5 * (vm.accuracy + vm.f1);
    if (row.val_score > result.best_val_score) {
      result.best_val_score = row.val_score;
      result.best_epoch = epoch;
      result.params = params;
    }
    row.best_val_score = result.best_val_score;

    tape.backward(loss);
    adam.config.lr = row.lr;
    try {
      adam_step(params, p.gradients(), adam);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.log.push_back(row);
    if (on_epoch && !on_epoch(row)) break;
  }
  return result;
}

nlohmann::ordered_json checkpoint_json(const TrainResult& result) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = to_json(result.config);
  j["class_weights"] = {result.class_weights[0], result.class_weights[1]};
  j["best_epoch"] = result.best_epoch;
  j["best_val_score"] = result.best_val_score;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < result.params.size(); ++i) {
    const Tensor& t = result.params.value(i);
    params[result.params.name(i)] = {{"shape", t.shape()}, {"data", t.storage()}};
  }
  j["params"] = std::move(params);
  return j;
}

void write_checkpoint(const TrainResult& result, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << checkpoint_json(result).dump(1) << '\n';
  if (!out) throw Error("write failed: " + file.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) {
    throw DataError(file.string() + ": not a checkpoint file");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw DataError(file.string() + ": unsupported checkpoint version");
  }
  Checkpoint c;
  try {
    c.config = train_config_from_json(j.at("config"));
    c.best_epoch = j.at("best_epoch").get<int>();
    c.best_val_score = j.at("best_val_score").get<double>();
    ParamStore expected = init_params(c.config.model, c.config.seed);
    const auto& params = j.at("params");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const std::string& name = expected.name(i);
      if (!params.contains(name)) throw DataError(file.string() + ": missing parameter " + name);
      const auto& p = params.at(name);
      Tensor t(p.at("shape").get<Shape>(), p.at("data").get<std::vector<double>>());
      if (t.shape() != expected.value(i).shape()) {
        throw DataError(file.string() + ": parameter " + name + " has shape " +
                        shape_str(t.shape()) + ", expected " +
                        shape_str(expected.value(i).shape()));
      }
      c.params.add(name, std::move(t));
    }
    if (params.size() != expected.size()) {
      throw DataError(file.string() + ": unexpected extra parameters");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  return c;
}

GradCheckResult check_model_gradients(const EnterpriseKG& kg, const ModelConfig& cfg,
                                      std::uint64_t seed, double h) {
  if (kg.splits.train.empty()) throw DataError("training split is empty");
  const ModelInputs in = prepare_model_inputs(kg, cfg);
  ParamStore params = init_params(cfg, seed);
  const std::vector<std::size_t>& nodes = kg.splits.train;
  std::vector<std::size_t> cols;
  for (std::size_t i : nodes) cols.push_back(static_cast<std::size_t>(in.labels.at(i)));
  // Per-node terms of the unit-weight loss; their sum is nll_loss.
  return grad_check(
      params,
      [&](Tape&, const BoundParams& p) {
        return ops::scale(
            ops::log_clamped(ops::pick(forward(in, p, cfg).probs, nodes, cols), 1e-12), -1.0);
      },
      h);
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,lr,loss,train_accuracy,val_accuracy,val_f1,val_auc,val_score,best_val_score\n";
  char buf[256];
  for (const EpochLog& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.8g,%.10g,%.6f,%.6f,%.6f,", r.epoch, r.lr, r.loss,
                  r.train_accuracy, r.val_accuracy, r.val_f1);
    out << buf;
    if (r.val_auc) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.val_auc);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", r.val_score, r.best_val_score);
    out << buf;
  }
  return out.str();
}

}  // namespace comrisk
