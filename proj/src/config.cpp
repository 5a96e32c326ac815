#include "comrisk/config.hpp"

#include <utility>
#include <vector>

#include "comrisk/errors.hpp"

namespace comrisk {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <typename E>
using EnumNames = std::vector<std::pair<E, const char*>>;

const EnumNames<Ablation> kAblations = {{Ablation::Full, "full"},
                                        {Ablation::NoIntra, "no_intra"},
                                        {Ablation::NoHyper, "no_hyper"},
                                        {Ablation::NoHeter, "no_heter"}};
const EnumNames<IntraVariant> kIntraVariants = {
    {IntraVariant::Encoder, "encoder"}, {IntraVariant::RiskFrequency, "risk_frequency"}};
const EnumNames<HyperVariant> kHyperVariants = {{HyperVariant::Typed, "typed"},
                                                {HyperVariant::Hgnn, "hgnn"}};
const EnumNames<HeterVariant> kHeterVariants = {
    {HeterVariant::Hierarchical, "hierarchical"}, {HeterVariant::Rgcn, "rgcn"}};
const EnumNames<ConvForm> kConvForms = {{ConvForm::Laplacian, "laplacian"},
                                        {ConvForm::Classical, "classical"}};
const EnumNames<FusionMlpInput> kFusionInputs = {{FusionMlpInput::Intra, "intra"},
                                                 {FusionMlpInput::Heter, "heter"}};
const EnumNames<ops::GeluForm> kGeluForms = {{ops::GeluForm::Tanh, "tanh"},
                                             {ops::GeluForm::Erf, "erf"}};

template <typename E>
const char* name_of(const EnumNames<E>& names, E v) {
  for (const auto& [e, n] : names) {
    if (e == v) return n;
  }
  return "?";
}

template <typename E>
E parse_enum(const EnumNames<E>& names, const std::string& s, const char* what) {
  for (const auto& [e, n] : names) {
    if (s == n) return e;
  }
  std::string allowed;
  for (const auto& [e, n] : names) allowed += std::string(allowed.empty() ? "" : ", ") + n;
  throw ConfigError(std::string("invalid ") + what + " '" + s + "' (expected " +
                    allowed + ")");
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_size(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

std::string to_string(Ablation a) { return name_of(kAblations, a); }
Ablation parse_ablation(const std::string& s) {
  return parse_enum(kAblations, s, "ablation");
}

void ModelConfig::validate() const {
  if (input_dim == 0 || output_dim == 0 || supplement_dim == 0) {
    throw ConfigError("dimensions must be positive");
  }
  if (lawsuit_dim < 3) throw ConfigError("lawsuit_dim must be at least 3");
  if (hyper_layers < 1) throw ConfigError("hyper_layers must be >= 1");
  if (heter_blocks < 1) throw ConfigError("heter_blocks must be >= 1");
  if (!(decay_recent > 0.0) || !(decay_old > 0.0)) {
    throw ConfigError("decay rates must be positive");
  }
  if (!(bn_eps >= 0.0)) throw ConfigError("bn_eps must be non-negative");
  if (!(leaky_slope >= 0.0)) throw ConfigError("leaky_slope must be non-negative");
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr_max > 0.0) || !(lr_min >= 0.0) || lr_min > lr_max) {
    throw ConfigError("need 0 <= lr_min <= lr_max and lr_max > 0");
  }
  if (!(loss_weights[0] > 0.0) || !(loss_weights[1] > 0.0)) {
    throw ConfigError("loss weights must be positive");
  }
}

ordered_json to_json(const ModelConfig& c) {
  ordered_json j;
  j["input_dim"] = c.input_dim;
  j["output_dim"] = c.output_dim;
  j["lawsuit_dim"] = c.lawsuit_dim;
  j["supplement_dim"] = c.supplement_dim;
  j["mlp_hidden"] = c.mlp_hidden;
  j["hyper_layers"] = c.hyper_layers;
  j["hyper_activation"] = c.hyper_activation;
  j["conv_form"] = name_of(kConvForms, c.conv_form);
  j["heter_blocks"] = c.heter_blocks;
  j["weighted_uses_projected"] = c.weighted_uses_projected;
  j["directed_relations"] = c.directed_relations;
  j["bn_identity"] = c.bn_identity;
  j["bn_eps"] = c.bn_eps;
  j["leaky_slope"] = c.leaky_slope;
  j["gelu"] = name_of(kGeluForms, c.gelu);
  j["decay_recent"] = c.decay_recent;
  j["decay_old"] = c.decay_old;
  j["decay_trainable"] = c.decay_trainable;
  j["fusion_mlp_input"] = name_of(kFusionInputs, c.fusion_mlp_input);
  j["ablation"] = name_of(kAblations, c.ablation);
  j["intra_variant"] = name_of(kIntraVariants, c.intra_variant);
  j["hyper_variant"] = name_of(kHyperVariants, c.hyper_variant);
  j["heter_variant"] = name_of(kHeterVariants, c.heter_variant);
  return j;
}

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["model"] = to_json(c.model);
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["lr_max"] = c.lr_max;
  j["lr_min"] = c.lr_min;
  j["loss_weights"] = {c.loss_weights[0], c.loss_weights[1]};
  j["balance_loss"] = c.balance_loss;
  return j;
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "input_dim") c.input_dim = get_size(v, key);
    else if (key == "output_dim") c.output_dim = get_size(v, key);
    else if (key == "lawsuit_dim") c.lawsuit_dim = get_size(v, key);
    else if (key == "supplement_dim") c.supplement_dim = get_size(v, key);
    else if (key == "mlp_hidden") c.mlp_hidden = get_size(v, key);
    else if (key == "hyper_layers") c.hyper_layers = get_size(v, key);
    else if (key == "hyper_activation") c.hyper_activation = get_as<bool>(v, key);
    else if (key == "conv_form") c.conv_form = parse_enum(kConvForms, get_as<std::string>(v, key), "conv_form");
    else if (key == "heter_blocks") c.heter_blocks = get_size(v, key);
    else if (key == "weighted_uses_projected") c.weighted_uses_projected = get_as<bool>(v, key);
    else if (key == "directed_relations") c.directed_relations = get_as<bool>(v, key);
    else if (key == "bn_identity") c.bn_identity = get_as<bool>(v, key);
    else if (key == "bn_eps") c.bn_eps = get_as<double>(v, key);
    else if (key == "leaky_slope") c.leaky_slope = get_as<double>(v, key);
    else if (key == "gelu") c.gelu = parse_enum(kGeluForms, get_as<std::string>(v, key), "gelu");
    else if (key == "decay_recent") c.decay_recent = get_as<double>(v, key);
    else if (key == "decay_old") c.decay_old = get_as<double>(v, key);
    else if (key == "decay_trainable") c.decay_trainable = get_as<bool>(v, key);
    else if (key == "fusion_mlp_input") c.fusion_mlp_input = parse_enum(kFusionInputs, get_as<std::string>(v, key), "fusion_mlp_input");
    else if (key == "ablation") c.ablation = parse_enum(kAblations, get_as<std::string>(v, key), "ablation");
    else if (key == "intra_variant") c.intra_variant = parse_enum(kIntraVariants, get_as<std::string>(v, key), "intra_variant");
    else if (key == "hyper_variant") c.hyper_variant = parse_enum(kHyperVariants, get_as<std::string>(v, key), "hyper_variant");
    else if (key == "heter_variant") c.heter_variant = parse_enum(kHeterVariants, get_as<std::string>(v, key), "heter_variant");
    else throw ConfigError("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "model") {
      c.model = model_config_from_json(v, c.model);
    } else if (key == "epochs") {
      c.epochs = get_as<int>(v, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "lr_max") {
      c.lr_max = get_as<double>(v, key);
    } else if (key == "lr_min") {
      c.lr_min = get_as<double>(v, key);
    } else if (key == "loss_weights") {
      auto w = get_as<std::vector<double>>(v, key);
      if (w.size() != 2) throw ConfigError("loss_weights needs two entries");
      c.loss_weights = {w[0], w[1]};
    } else if (key == "balance_loss") {
      c.balance_loss = get_as<bool>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace comrisk
