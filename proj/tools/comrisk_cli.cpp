// comrisk command-line entry point.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or data error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "comrisk/config.hpp"
#include "comrisk/ekg_io.hpp"
#include "comrisk/errors.hpp"
#include "comrisk/intra_risk.hpp"
#include "comrisk/smesd.hpp"
#include "comrisk/stats.hpp"
#include "comrisk/synthetic.hpp"
#include "comrisk/train.hpp"

namespace fs = std::filesystem;
using namespace comrisk;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Relative data paths resolve against COMRISK_DATA_ROOT when it is set.
fs::path data_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* root = std::getenv("COMRISK_DATA_ROOT"); root && *root) {
      return fs::path(root) / path;
    }
  }
  return path;
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw DataError("data directory not found: " + p.string());
}

nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open config file " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

// Model and training options shared by train, gradcheck and sweep. Flags
// that were given override the config file, which overrides defaults.
struct TrainFlags {
  std::string config_file;
  int epochs = 0;
  std::uint64_t seed = 0;
  double lr_max = 0, lr_min = 0;
  std::size_t input_dim = 0, output_dim = 0, lawsuit_dim = 0, supplement_dim = 0;
  std::size_t hyper_layers = 0, heter_blocks = 0;
  std::string ablation, intra_variant, hyper_variant, heter_variant, conv_form, gelu,
      fusion_mlp_input;
  bool balance_loss = false;

  std::vector<std::pair<CLI::Option*, std::string>> given;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file");
    auto opt = [&](CLI::Option* o, const char* key) { given.push_back({o, key}); };
    opt(app->add_option("--epochs", epochs), "epochs");
    opt(app->add_option("--seed", seed), "seed");
    opt(app->add_option("--lr-max", lr_max), "lr_max");
    opt(app->add_option("--lr-min", lr_min), "lr_min");
    opt(app->add_option("--input-dim", input_dim), "model.input_dim");
    opt(app->add_option("--output-dim", output_dim), "model.output_dim");
    opt(app->add_option("--lawsuit-dim", lawsuit_dim), "model.lawsuit_dim");
    opt(app->add_option("--supplement-dim", supplement_dim), "model.supplement_dim");
    opt(app->add_option("--hyper-layers", hyper_layers), "model.hyper_layers");
    opt(app->add_option("--heter-blocks", heter_blocks), "model.heter_blocks");
    opt(app->add_option("--ablation", ablation, "full, no_intra, no_hyper, no_heter"),
        "model.ablation");
    opt(app->add_option("--intra-variant", intra_variant, "encoder, risk_frequency"),
        "model.intra_variant");
    opt(app->add_option("--hyper-variant", hyper_variant, "typed, hgnn"), "model.hyper_variant");
    opt(app->add_option("--heter-variant", heter_variant, "hierarchical, rgcn"),
        "model.heter_variant");
    opt(app->add_option("--conv-form", conv_form, "laplacian, classical"), "model.conv_form");
    opt(app->add_option("--gelu", gelu, "tanh, erf"), "model.gelu");
    opt(app->add_option("--fusion-mlp-input", fusion_mlp_input, "intra, heter"),
        "model.fusion_mlp_input");
    opt(app->add_flag("--balance-loss", balance_loss, "weight bankrupt losses by class ratio"),
        "balance_loss");
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_file.empty()) cfg = train_config_from_json(read_json_file(config_file));
    nlohmann::json j = nlohmann::json::object();
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [o, key] : given) {
      if (o->count() == 0) continue;
      const bool model_key = key.rfind("model.", 0) == 0;
      const std::string k = model_key ? key.substr(6) : key;
      nlohmann::json& dst = model_key ? m : j;
      if (k == "epochs") dst[k] = epochs;
      else if (k == "seed") dst[k] = seed;
      else if (k == "lr_max") dst[k] = lr_max;
      else if (k == "lr_min") dst[k] = lr_min;
      else if (k == "input_dim") dst[k] = input_dim;
      else if (k == "output_dim") dst[k] = output_dim;
      else if (k == "lawsuit_dim") dst[k] = lawsuit_dim;
      else if (k == "supplement_dim") dst[k] = supplement_dim;
      else if (k == "hyper_layers") dst[k] = hyper_layers;
      else if (k == "heter_blocks") dst[k] = heter_blocks;
      else if (k == "ablation") dst[k] = ablation;
      else if (k == "intra_variant") dst[k] = intra_variant;
      else if (k == "hyper_variant") dst[k] = hyper_variant;
      else if (k == "heter_variant") dst[k] = heter_variant;
      else if (k == "conv_form") dst[k] = conv_form;
      else if (k == "gelu") dst[k] = gelu;
      else if (k == "fusion_mlp_input") dst[k] = fusion_mlp_input;
      else if (k == "balance_loss") dst[k] = balance_loss;
    }
    if (!m.empty()) j["model"] = m;
    return train_config_from_json(j, cfg);
  }
};

int cmd_analyze(const std::string& data, const std::string& format, const std::string& ttest) {
  const fs::path dir = data_path(data);
  require_dir(dir);
  const EnterpriseKG kg = load_ekg(dir);
  const stats::TTestVariant variant =
      ttest == "pooled" ? stats::TTestVariant::Pooled : stats::TTestVariant::Welch;
  const stats::StatsReport report = stats::build_indicator_table(kg, variant);
  std::cout << (format == "csv" ? stats::render_csv(report) : stats::render_text(report));
  return 0;
}

int cmd_gen_synth(const SynthConfig& sc, const std::string& out, const std::string& embeddings,
                  std::size_t embedding_dim) {
  const EnterpriseKG kg = gen_synthetic(sc);
  write_ekg(kg, out);
  if (!embeddings.empty()) {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vecs;
    for (std::size_t v = 0; v < kg.num_nodes(); ++v) {
      ids.push_back(kg.node_id(v));
      vecs.push_back(synthetic_supplement(kg.node_id(v), embedding_dim));
    }
    write_embeddings(ids, vecs, embeddings);
  }
  std::size_t bankrupt = 0;
  for (const Enterprise& e : kg.enterprises) bankrupt += e.label && *e.label == 1;
  std::cout << "wrote " << kg.num_enterprises() << " enterprises (" << bankrupt
            << " bankrupt), " << kg.persons.size() << " persons, " << kg.edges.size()
            << " edges, " << kg.hyperedges.size() << " hyperedges to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& data, const std::string& out, const TrainConfig& cfg,
              const std::string& embeddings, bool quiet) {
  const fs::path dir = data_path(data);
  require_dir(dir);
  const EnterpriseKG kg = load_ekg(dir);
  EmbeddingMap emb;
  if (!embeddings.empty()) emb = load_embeddings(data_path(embeddings));
  const int every = std::max(1, cfg.epochs / 10);
  const TrainResult r = train(kg, cfg, embeddings.empty() ? nullptr : &emb,
                              [&](const EpochLog& row) {
                                if (!quiet && (row.epoch % every == 0 || row.epoch + 1 == cfg.epochs)) {
                                  std::cerr << "epoch " << row.epoch << " loss " << row.loss
                                            << " val_score " << row.val_score << "\n";
                                }
                                return true;
                              });
  fs::create_directories(out);
  write_checkpoint(r, fs::path(out) / "checkpoint.json");
  write_text(fs::path(out) / "epoch_log.csv", epoch_log_csv(r.log));
  std::cout << "best epoch " << r.best_epoch << ", validation (accuracy + F1) / 2 = "
            << r.best_val_score << "\ncheckpoint: " << (fs::path(out) / "checkpoint.json").string()
            << "\n";
  return 0;
}

int cmd_eval(const std::string& data, const std::string& checkpoint, const std::string& split,
             const std::string& format, const std::string& out, const std::string& embeddings) {
  const fs::path dir = data_path(data);
  require_dir(dir);
  const EnterpriseKG kg = load_ekg(dir);
  const Checkpoint c = read_checkpoint(checkpoint);
  EmbeddingMap emb;
  if (!embeddings.empty()) emb = load_embeddings(data_path(embeddings));
  const MetricsReport m = evaluate(c.params, kg, c.config.model, parse_split(split),
                                   embeddings.empty() ? nullptr : &emb);
  nlohmann::ordered_json j;
  j["split"] = split;
  j["metrics"] = to_json(m);
  const std::string json_text = j.dump(2) + "\n";
  if (!out.empty()) write_text(out, json_text);
  std::cout << (format == "text" ? render_text(m) : json_text);
  return 0;
}

int cmd_gradcheck(std::size_t n, std::uint64_t seed, double h, double threshold,
                  const TrainConfig& cfg) {
  const EnterpriseKG kg = gen_gradcheck_graph(n, seed);
  const GradCheckResult r = check_model_gradients(kg, cfg.model, seed, h);
  std::printf("max relative error %.3e over %zu coordinates (worst %s[%zu]: analytic %.10g, "
              "numeric %.10g)\n",
              r.max_rel_error, r.coordinates, r.worst_param.c_str(), r.worst_index, r.analytic,
              r.numeric);
  return r.max_rel_error <= threshold ? 0 : kExitRuntime;
}

std::vector<std::size_t> parse_grid(const std::string& s) {
  std::vector<std::size_t> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      grid.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("invalid grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw ConfigError("empty grid");
  return grid;
}

int cmd_sweep(const std::string& data, const std::string& param, const std::string& grid_text,
              int seeds, const TrainConfig& base, std::size_t synth_n, const std::string& out) {
  const std::vector<std::size_t> grid = parse_grid(grid_text);
  if (param != "lawsuit_dim" && param != "output_dim" && param != "input_dim") {
    throw ConfigError("--param must be lawsuit_dim, output_dim or input_dim");
  }
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  EnterpriseKG kg;
  if (!data.empty()) {
    const fs::path dir = data_path(data);
    require_dir(dir);
    kg = load_ekg(dir);
  } else {
    SynthConfig sc;
    sc.seed = base.seed;
    sc.n_enterprises = synth_n;
    kg = gen_synthetic(sc);
  }
  std::ostringstream csv;
  csv << param << ",seed,best_epoch,val_score,test_accuracy,test_precision,test_recall,test_f1,"
                  "test_auc\n";
  for (std::size_t value : grid) {
    for (int s = 0; s < seeds; ++s) {
      TrainConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      if (param == "lawsuit_dim") cfg.model.lawsuit_dim = value;
      else if (param == "output_dim") cfg.model.output_dim = value;
      else cfg.model.input_dim = value;
      const TrainResult r = train(kg, cfg);
      const MetricsReport m = evaluate(r.params, kg, cfg.model, Split::Test);
      char buf[256];
      std::snprintf(buf, sizeof buf, "%zu,%llu,%d,%.6f,%.6f,%.6f,%.6f,%.6f,", value,
                    static_cast<unsigned long long>(cfg.seed), r.best_epoch, r.best_val_score,
                    m.accuracy, m.precision, m.recall, m.f1);
      csv << buf;
      if (m.auc) {
        std::snprintf(buf, sizeof buf, "%.6f", *m.auc);
        csv << buf;
      }
      csv << "\n";
    }
  }
  if (!out.empty()) write_text(out, csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bankruptcy prediction on enterprise knowledge graphs"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "Correlation and t-test table of the indicators");
  std::string a_data, a_format = "text", a_ttest = "welch";
  analyze->add_option("--data", a_data, "EKG directory")->required();
  analyze->add_option("--format", a_format)->check(CLI::IsMember({"text", "csv"}));
  analyze->add_option("--ttest", a_ttest)->check(CLI::IsMember({"welch", "pooled"}));

  auto* gen = app.add_subcommand("gen-synth", "Write a planted-signal synthetic EKG");
  SynthConfig sc;
  std::string g_out, g_emb;
  std::size_t g_emb_dim = 16;
  bool no_intra = false, no_hyper = false, no_contagion = false;
  gen->add_option("--out", g_out, "output directory")->required();
  gen->add_option("--seed", sc.seed);
  gen->add_option("--n", sc.n_enterprises, "number of enterprises");
  gen->add_option("--persons", sc.n_persons, "number of persons (default n/2)");
  gen->add_option("--strength", sc.signal_strength, "signal strength in [0, 1]");
  gen->add_option("--bankrupt-fraction", sc.bankrupt_fraction);
  gen->add_flag("--no-intra-channel", no_intra);
  gen->add_flag("--no-hyper-channel", no_hyper);
  gen->add_flag("--no-contagion-channel", no_contagion);
  gen->add_option("--embeddings", g_emb, "also write supplement embeddings to this file");
  gen->add_option("--embedding-dim", g_emb_dim);

  auto* trn = app.add_subcommand("train", "Train and write checkpoint.json and epoch_log.csv");
  std::string t_data, t_out, t_emb;
  bool t_quiet = false;
  TrainFlags t_flags;
  trn->add_option("--data", t_data, "EKG directory")->required();
  trn->add_option("--out", t_out, "output directory")->required();
  trn->add_option("--embeddings", t_emb, "supplement embeddings (jsonl)");
  trn->add_flag("--quiet", t_quiet);
  t_flags.attach(trn);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  std::string e_data, e_ckpt, e_split = "test", e_format = "json", e_out, e_emb;
  ev->add_option("--data", e_data, "EKG directory")->required();
  ev->add_option("--checkpoint", e_ckpt)->required();
  ev->add_option("--split", e_split)->check(CLI::IsMember({"train", "val", "test"}));
  ev->add_option("--format", e_format)->check(CLI::IsMember({"json", "text"}));
  ev->add_option("--out", e_out, "also write the metrics JSON here");
  ev->add_option("--embeddings", e_emb);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
  std::size_t gc_n = 10;
  double gc_h = 1e-6, gc_threshold = 1e-4;
  TrainFlags gc_flags;
  gc->add_option("--n", gc_n, "number of nodes (at least 9)");
  gc->add_option("--step", gc_h, "finite-difference step");
  gc->add_option("--threshold", gc_threshold);
  gc_flags.attach(gc);

  auto* sw = app.add_subcommand("sweep", "Train over a dimension grid and write CSV");
  std::string s_data, s_param = "lawsuit_dim", s_grid, s_out;
  int s_seeds = 1;
  std::size_t s_synth_n = 200;
  TrainFlags s_flags;
  sw->add_option("--data", s_data, "EKG directory (default: synthetic graph)");
  sw->add_option("--param", s_param)->check(
      CLI::IsMember({"lawsuit_dim", "output_dim", "input_dim"}));
  sw->add_option("--grid", s_grid, "comma-separated values")->required();
  sw->add_option("--seeds", s_seeds);
  sw->add_option("--synthetic-n", s_synth_n);
  sw->add_option("--out", s_out, "also write the CSV here");
  s_flags.attach(sw);

  auto* cv = app.add_subcommand("convert-smesd", "Convert the released CSV tables to EKG files");
  std::string c_in, c_out, c_snapshot = "2021-12-31";
  cv->add_option("--in", c_in)->required();
  cv->add_option("--out", c_out)->required();
  cv->add_option("--snapshot", c_snapshot, "snapshot date YYYY-MM-DD");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*analyze) return cmd_analyze(a_data, a_format, a_ttest);
    if (*gen) {
      sc.intra_channel = !no_intra;
      sc.hyper_channel = !no_hyper;
      sc.contagion_channel = !no_contagion;
      return cmd_gen_synth(sc, g_out, g_emb, g_emb_dim);
    }
    if (*trn) return cmd_train(t_data, t_out, t_flags.resolve(), t_emb, t_quiet);
    if (*ev) return cmd_eval(e_data, e_ckpt, e_split, e_format, e_out, e_emb);
    if (*gc) {
      const TrainConfig cfg = gc_flags.resolve();
      const bool seeded = gc->count("--seed") > 0 || !gc_flags.config_file.empty();
      return cmd_gradcheck(gc_n, seeded ? cfg.seed : 1, gc_h, gc_threshold, cfg);
    }
    if (*sw) return cmd_sweep(s_data, s_param, s_grid, s_seeds, s_flags.resolve(), s_synth_n, s_out);
    if (*cv) {
      const EnterpriseKG kg = convert_smesd(data_path(c_in), c_out, Date::parse(c_snapshot));
      std::cout << "converted " << kg.num_enterprises() << " enterprises, " << kg.persons.size()
                << " persons (train/val/test " << kg.splits.train.size() << "/"
                << kg.splits.val.size() << "/" << kg.splits.test.size() << ")\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
