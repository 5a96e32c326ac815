#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <json.hpp>

#include "comrisk/ops.hpp"

namespace comrisk {

enum class Ablation { Full, NoIntra, NoHyper, NoHeter };
/// Encoder replaced by lawsuit-attribute frequencies through one linear map.
enum class IntraVariant { Encoder, RiskFrequency };
/// Typed hyperedges with learned type weights, or one merged untyped
/// hypergraph convolved in the classical form.
enum class HyperVariant { Typed, Hgnn };
/// Hierarchical attention, or relational graph convolution.
enum class HeterVariant { Hierarchical, Rgcn };
/// Laplacian: (I - Theta) X W. Classical: Theta X W.
enum class ConvForm { Laplacian, Classical };
enum class FusionMlpInput { Intra, Heter };

struct ModelConfig {
  std::size_t input_dim = 16;       // d
  std::size_t output_dim = 12;      // d'
  std::size_t lawsuit_dim = 20;     // width of a lawsuit embedding
  std::size_t supplement_dim = 16;  // width of the supplement embedding
  std::size_t mlp_hidden = 0;       // 0 means output_dim

  std::size_t hyper_layers = 2;
  bool hyper_activation = true;
  ConvForm conv_form = ConvForm::Laplacian;

  std::size_t heter_blocks = 1;
  bool weighted_uses_projected = false;
  bool directed_relations = false;
  /// Replaces batch normalization by identity; locality/equivariance tests
  /// only.
  bool bn_identity = false;
  double bn_eps = 1e-5;
  double leaky_slope = 0.01;
  ops::GeluForm gelu = ops::GeluForm::Tanh;

  double decay_recent = 0.1;
  double decay_old = 1.0;
  bool decay_trainable = false;

  FusionMlpInput fusion_mlp_input = FusionMlpInput::Intra;
  Ablation ablation = Ablation::Full;
  IntraVariant intra_variant = IntraVariant::Encoder;
  HyperVariant hyper_variant = HyperVariant::Typed;
  HeterVariant heter_variant = HeterVariant::Hierarchical;

  std::size_t mlp_width() const { return mlp_hidden ? mlp_hidden : output_dim; }
  void validate() const;
};

struct TrainConfig {
  ModelConfig model;
  int epochs = 500;
  std::uint64_t seed = 0;
  double lr_max = 0.01;
  double lr_min = 0.0;
  /// Per-class loss weights, index 0 survive, 1 bankrupt.
  std::array<double, 2> loss_weights = {1.0, 1.0};
  /// Loss-weighted variant: bankrupt weight = #survive / #bankrupt of the
  /// training split (overrides loss_weights[1]).
  bool balance_loss = false;

  void validate() const;
};

nlohmann::ordered_json to_json(const ModelConfig& c);
nlohmann::ordered_json to_json(const TrainConfig& c);
/// Applies the keys of `j` on top of `base`; unknown keys and malformed
/// values raise ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& s);

}  // namespace comrisk
