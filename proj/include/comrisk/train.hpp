#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "comrisk/config.hpp"
#include "comrisk/ekg.hpp"
#include "comrisk/ekg_io.hpp"
#include "comrisk/gradcheck.hpp"
#include "comrisk/metrics.hpp"
#include "comrisk/model.hpp"
#include "comrisk/params.hpp"

namespace comrisk {

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
  std::optional<double> val_auc;
  /// (val_accuracy + val_f1) / 2 of the parameters entering this epoch.
  double val_score = 0.0;
  /// Best val_score seen so far, including this epoch.
  double best_val_score = 0.0;
};

struct TrainResult {
  TrainConfig config;
  std::array<double, 2> class_weights = {1.0, 1.0};
  ParamStore params;  // parameters with the best validation score
  int best_epoch = -1;
  double best_val_score = 0.0;
  std::vector<EpochLog> log;
};

/// Called after every epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochLog&)>;

/// Full-batch Adam with cosine-annealed learning rate. The parameters that
/// enter an epoch are scored on the validation split from that epoch's
/// forward pass and kept when the score strictly improves. Throws DataError
/// for empty train/validation splits and NumericError (naming the epoch)
/// when the loss is not finite.
TrainResult train(const EnterpriseKG& kg, const TrainConfig& config,
                  const EmbeddingMap* embeddings = nullptr,
                  const EpochCallback& on_epoch = {});

/// Class weights used by the loss: configured weights, or with
/// `balance_loss` the bankrupt weight #survive / #bankrupt of the training
/// split.
std::array<double, 2> resolve_class_weights(const EnterpriseKG& kg, const TrainConfig& config);

enum class Split { Train, Val, Test };
Split parse_split(const std::string& s);
const std::vector<std::size_t>& split_nodes(const EnterpriseKG& kg, Split split);

MetricsReport evaluate(const ParamStore& params, const EnterpriseKG& kg,
                       const ModelConfig& cfg, Split split,
                       const EmbeddingMap* embeddings = nullptr);
MetricsReport evaluate(const ParamStore& params, const ModelInputs& in,
                       const ModelConfig& cfg, std::span<const std::size_t> nodes);

/// Deterministic JSON: format tag, configuration, selection summary and
/// every parameter keyed by name. No timestamps.
nlohmann::ordered_json checkpoint_json(const TrainResult& result);
void write_checkpoint(const TrainResult& result, const std::filesystem::path& file);

struct Checkpoint {
  TrainConfig config;
  ParamStore params;
  int best_epoch = -1;
  double best_val_score = 0.0;
};
Checkpoint read_checkpoint(const std::filesystem::path& file);

/// Finite-difference check of the training loss (unit class weights) with
/// respect to every parameter, at the initialization drawn from `seed`.
GradCheckResult check_model_gradients(const EnterpriseKG& kg, const ModelConfig& cfg,
                                      std::uint64_t seed, double h = 1e-6);

std::string epoch_log_csv(const std::vector<EpochLog>& log);

}  // namespace comrisk
