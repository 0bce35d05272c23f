#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "fairmit/errors.hpp"
#include "fairmit/io.hpp"
#include "fairmit/metrics.hpp"
#include "fairmit/mitigate.hpp"

namespace py = pybind11;
using namespace fairmit;

namespace {

std::vector<ScoreRecord> make_records(const std::vector<int>& labels,
                                      const std::vector<double>& scores) {
  if (labels.size() != scores.size()) {
    throw input_error("labels and scores must have the same length");
  }
  std::vector<ScoreRecord> records;
  records.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw input_error("labels must be 0 (female) or 1 (male)");
    }
    records.push_back(ScoreRecord{std::to_string(i), labels[i], scores[i]});
  }
  return records;
}

py::dict report_dict(const MetricReport& report) {
  py::dict out;
  out["accuracy"] = report.accuracy;
  out["dpd"] = report.dpd;
  out["ppd"] = report.ppd;
  out["eood"] = report.eood;
  out["prpd"] = report.prpd;
  out["tpr"] = report.tpr;
  out["tnr"] = report.tnr;
  out["ppv"] = report.ppv;
  out["npv"] = report.npv;
  return out;
}

py::dict counts_dict(const ConfusionCounts& cc) {
  py::dict out;
  out["tp"] = cc.tp;
  out["fp"] = cc.fp;
  out["tn"] = cc.tn;
  out["fn"] = cc.fn;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Group fairness metrics and bias mitigation primitives";

  py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
  py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError",
                                          PyExc_ArithmeticError);

  m.def(
      "evaluate",
      [](const std::vector<int>& labels, const std::vector<double>& scores,
         double threshold) {
        const auto records = make_records(labels, scores);
        const auto counts = confusion_from_scores(records, Threshold(threshold));
        py::dict out = report_dict(metric_report(counts));
        out["counts"] = counts_dict(counts);
        return out;
      },
      py::arg("labels"), py::arg("scores"), py::arg("threshold") = 0.5,
      "Confusion counts and fairness metrics at a fixed threshold.\n"
      "Labels: 0 = female, 1 = male (positive class). Scores in [0, 1].");

  m.def(
      "optimize_threshold",
      [](const std::vector<int>& labels, const std::vector<double>& scores,
         const std::string& strategy) {
        const auto parsed = strategy_from_name(strategy);
        if (!parsed) {
          throw config_error("unknown threshold strategy: " + strategy);
        }
        const auto records = make_records(labels, scores);
        const auto result = optimize_threshold(records, *parsed);
        py::dict out;
        out["t_star"] = result.t_star.value();
        out["objective"] = result.objective_value;
        out["candidates"] = result.candidates_evaluated;
        out["metrics"] = report_dict(result.report_at_t);
        return out;
      },
      py::arg("labels"), py::arg("scores"), py::arg("strategy"),
      "Exhaustive threshold search minimizing the named strategy objective\n"
      "(equal-true, equal-false, equal-total, equal-opportunity).");

  m.def(
      "class_weights",
      [](std::size_t male, std::size_t female) {
        const ClassWeights w = class_weights(male, female);
        return py::make_tuple(w.male, w.female);
      },
      py::arg("male"), py::arg("female"),
      "Balanced class weights (male, female) = N / (2 * class count).");

  m.def(
      "load_scores",
      [](const std::string& path) {
        py::list out;
        for (const auto& rec : load_scores(std::filesystem::path(path))) {
          py::dict row;
          row["id"] = rec.id;
          row["label"] = rec.label;
          row["score"] = rec.score;
          out.append(row);
        }
        return out;
      },
      py::arg("path"), "Read a score CSV or JSONL file.");

  m.attr("FEMALE") = kFemale;
  m.attr("MALE") = kMale;
  m.attr("__version__") = "0.1.0";
}
