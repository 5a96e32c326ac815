#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "comrisk/errors.hpp"
#include "comrisk/hyper.hpp"
#include "comrisk/incidence.hpp"
#include "comrisk/metrics.hpp"
#include "comrisk/stats.hpp"
#include "comrisk/synthetic.hpp"
#include "comrisk/train.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace comrisk;

namespace {

py::object to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  if (o.is_none()) return nlohmann::json::object();
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict epoch_dict(const EpochLog& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["lr"] = e.lr;
  d["loss"] = e.loss;
  d["train_accuracy"] = e.train_accuracy;
  d["val_accuracy"] = e.val_accuracy;
  d["val_f1"] = e.val_f1;
  d["val_auc"] = e.val_auc ? py::object(py::float_(*e.val_auc)) : py::none();
  d["val_score"] = e.val_score;
  d["best_val_score"] = e.best_val_score;
  return d;
}

}  // namespace

PYBIND11_MODULE(_comrisk, m) {
  m.doc() = "Bankruptcy risk prediction on enterprise knowledge graphs";
  py::register_exception<Error>(m, "ComriskError", PyExc_ValueError);

  m.def(
      "gen_synthetic",
      [](const fs::path& out, std::size_t n, std::uint64_t seed, double strength,
         double bankrupt_fraction, bool intra, bool hyper, bool contagion) {
        SynthConfig sc;
        sc.seed = seed;
        sc.n_enterprises = n;
        sc.signal_strength = strength;
        sc.bankrupt_fraction = bankrupt_fraction;
        sc.intra_channel = intra;
        sc.hyper_channel = hyper;
        sc.contagion_channel = contagion;
        const EnterpriseKG kg = gen_synthetic(sc);
        write_ekg(kg, out);
        py::dict d;
        d["enterprises"] = kg.enterprises.size();
        d["persons"] = kg.persons.size();
        d["edges"] = kg.edges.size();
        d["hyperedges"] = kg.hyperedges.size();
        std::size_t lawsuits = 0;
        for (const Enterprise& e : kg.enterprises) lawsuits += e.lawsuits.size();
        d["lawsuits"] = lawsuits;
        return d;
      },
      py::arg("out"), py::arg("n") = 60, py::arg("seed") = 0, py::arg("strength") = 1.0,
      py::arg("bankrupt_fraction") = 0.5, py::arg("intra") = true, py::arg("hyper") = true,
      py::arg("contagion") = true,
      "Write a planted-signal graph to `out`; returns element counts.");

  m.def(
      "analyze",
      [](const fs::path& data, const std::string& ttest) {
        if (ttest != "welch" && ttest != "pooled")
          throw ConfigError("ttest must be welch or pooled, got " + ttest);
        const stats::StatsReport r = stats::build_indicator_table(
            load_ekg(data), ttest == "pooled" ? stats::TTestVariant::Pooled
                                              : stats::TTestVariant::Welch);
        py::list rows;
        for (const stats::StatsRow& row : r.rows) {
          py::dict d;
          d["indicator"] = row.indicator;
          d["defined"] = row.defined;
          d["coefficient"] = row.coefficient;
          d["polarity"] = row.polarity == stats::Polarity::Positive ? "positive" : "negative";
          d["mean_surviving"] = row.mean_surviving;
          d["mean_bankrupt"] = row.mean_bankrupt;
          d["p_corr"] = row.p_corr;
          d["p_ttest"] = row.p_ttest;
          d["stars_corr"] = row.stars_corr;
          d["stars_ttest"] = row.stars_ttest;
          rows.append(d);
        }
        return rows;
      },
      py::arg("data"), py::arg("ttest") = "welch",
      "Correlation and t-test of the twelve indicators against the label.");

  m.def(
      "train",
      [](const fs::path& data, const py::object& config, const std::optional<fs::path>& out) {
        const TrainConfig tc = train_config_from_json(from_py(config));
        TrainResult r;
        {
          const EnterpriseKG kg = load_ekg(data);
          py::gil_scoped_release release;
          r = train(kg, tc);
        }
        py::dict d;
        d["best_epoch"] = r.best_epoch;
        d["best_val_score"] = r.best_val_score;
        d["config"] = to_py(to_json(r.config));
        py::list log;
        for (const EpochLog& e : r.log) log.append(epoch_dict(e));
        d["log"] = log;
        if (out) {
          fs::create_directories(*out);
          write_checkpoint(r, *out / "checkpoint.json");
          d["checkpoint"] = (*out / "checkpoint.json").string();
        }
        return d;
      },
      py::arg("data"), py::arg("config") = py::none(), py::arg("out") = py::none(),
      "Train on the graph in `data`. `config` takes the keys of a training config file.");

  m.def(
      "evaluate",
      [](const fs::path& data, const fs::path& checkpoint, const std::string& split) {
        const Checkpoint c = read_checkpoint(checkpoint);
        return to_py(to_json(evaluate(c.params, load_ekg(data), c.config.model, parse_split(split))));
      },
      py::arg("data"), py::arg("checkpoint"), py::arg("split") = "test");

  m.def(
      "gradcheck",
      [](std::size_t n, std::uint64_t seed, double step, const py::object& model) {
        const ModelConfig cfg = model_config_from_json(from_py(model));
        const GradCheckResult r = check_model_gradients(gen_gradcheck_graph(n, seed), cfg, seed, step);
        py::dict d;
        d["max_rel_error"] = r.max_rel_error;
        d["worst_param"] = r.worst_param;
        d["worst_index"] = r.worst_index;
        d["analytic"] = r.analytic;
        d["numeric"] = r.numeric;
        d["coordinates"] = r.coordinates;
        return d;
      },
      py::arg("n") = 12, py::arg("seed") = 1, py::arg("step") = 1e-6,
      py::arg("model") = py::none(),
      "Finite-difference check of the full loss on a small generated graph.");

  m.def(
      "theta",
      [](std::size_t n, const std::vector<std::vector<std::size_t>>& hyperedges,
         const std::vector<double>& weights) {
        const Tensor t = build_theta(build_incidence(n, hyperedges), weights);
        py::array_t<double> a({t.rows(), t.cols()});
        std::copy(t.data().begin(), t.data().end(), a.mutable_data());
        return a;
      },
      py::arg("n"), py::arg("hyperedges"), py::arg("weights") = std::vector<double>{},
      "Dense normalized hypergraph propagation matrix.");

  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return auc_score(scores, labels);
      },
      py::arg("scores"), py::arg("labels"), "ROC AUC with mid-rank ties; None for one class.");

  m.def(
      "metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return to_py(to_json(compute_metrics(scores, labels)));
      },
      py::arg("scores"), py::arg("labels"));
}
