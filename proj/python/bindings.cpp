#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "frugalmct/baselines.hpp"
#include "frugalmct/cli.hpp"
#include "frugalmct/combiner.hpp"
#include "frugalmct/pipeline.hpp"
#include "frugalmct/predictor.hpp"
#include "frugalmct/selector.hpp"
#include "frugalmct/synthetic.hpp"

namespace py = pybind11;
using namespace frugalmct;

namespace {

using Rows = std::vector<std::vector<double>>;

ScoredLabelSet to_scored(const std::map<std::string, double>& m) {
  ScoredLabelSet s;
  for (const auto& [label, score] : m) s.set(label, score);
  return s;
}

std::map<std::string, double> from_scored(const ScoredLabelSet& s) {
  return {s.entries().begin(), s.entries().end()};
}

Matrix to_matrix(const Rows& rows) {
  if (rows.empty()) return {};
  return Matrix::from_rows(rows);
}

Rows from_matrix(const Matrix& m) {
  Rows out(m.rows());
  for (std::size_t n = 0; n < m.rows(); ++n) out[n].assign(m.row(n).begin(), m.row(n).end());
  return out;
}

SelectionInstance instance(const Rows& acc, const std::vector<double>& costs, ApiIndex base,
                           double budget) {
  return {to_matrix(acc), CostTable(costs, base), budget};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Budget-aware selection of multi-label prediction APIs";

  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<FormatError>(m, "FormatError");

  m.def("multilabel_accuracy", &multilabel_accuracy, py::arg("truth"), py::arg("pred"));
  m.def("f1_score", &f1_score, py::arg("truth"), py::arg("pred"));
  m.def("precision_score", &precision_score, py::arg("truth"), py::arg("pred"));

  m.def(
      "combine_scores",
      [](const std::map<std::string, double>& base, const std::map<std::string, double>& addon, double w) {
        return from_scored(combine_scores(to_scored(base), to_scored(addon), w));
      },
      py::arg("base"), py::arg("addon"), py::arg("w"));
  m.def(
      "apply_threshold",
      [](const std::map<std::string, double>& scored, double theta) {
        return apply_threshold(to_scored(scored), theta);
      },
      py::arg("scored"), py::arg("theta"));
  m.def(
      "featurize_bounded",
      [](const std::map<std::string, double>& base, const std::vector<std::string>& vocabulary) {
        return featurize_bounded(to_scored(base), vocabulary).values;
      },
      py::arg("base"), py::arg("vocabulary"));

  m.def(
      "select_sp",
      [](const std::vector<double>& acc, double p, const std::vector<double>& costs, ApiIndex base) {
        return select_sp(acc, p, CostTable(costs, base));
      },
      py::arg("acc"), py::arg("p"), py::arg("costs"), py::arg("base") = 0);
  m.def(
      "solve_dual_price",
      [](const Rows& acc, const std::vector<double>& costs, ApiIndex base, double budget) {
        const auto inst = instance(acc, costs, base, budget);
        inst.validate();
        return solve_dual_price(inst, inst.hatted_budget());
      },
      py::arg("acc"), py::arg("costs"), py::arg("base"), py::arg("budget"));
  m.def(
      "offline_strategy",
      [](const Rows& acc, const std::vector<double>& costs, ApiIndex base, double budget) {
        const auto r = offline_strategy(instance(acc, costs, base, budget));
        py::dict d;
        d["assignments"] = r.assignments;
        d["lp_objective"] = r.lp.objective;
        d["dual_price"] = r.lp.dual_price;
        d["fractional_rows"] = r.lp.fractional_rows;
        d["z"] = from_matrix(r.lp.z);
        return d;
      },
      py::arg("acc"), py::arg("costs"), py::arg("base"), py::arg("budget"));
  m.def(
      "brute_force_ilp",
      [](const Rows& acc, const std::vector<double>& costs, ApiIndex base, double budget) {
        const auto r = brute_force_ilp(instance(acc, costs, base, budget));
        return py::make_tuple(r.assignments, r.objective);
      },
      py::arg("acc"), py::arg("costs"), py::arg("base"), py::arg("budget"));
  m.def(
      "estimate_p_hat",
      [](const Rows& acc, const std::vector<double>& costs, ApiIndex base, double budget,
         double delta) { return estimate_p_hat(instance(acc, costs, base, budget), budget, delta); },
      py::arg("acc"), py::arg("costs"), py::arg("base"), py::arg("budget"), py::arg("delta"));
  m.def(
      "run_online",
      [](const Rows& stream, double p_hat, const std::vector<double>& costs, ApiIndex base,
         double budget) {
        OnlinePolicy policy{p_hat, 0.0, base, 0.0};
        return run_online(to_matrix(stream), policy, stream.size(), budget, CostTable(costs, base));
      },
      py::arg("stream"), py::arg("p_hat"), py::arg("costs"), py::arg("base"), py::arg("budget"));
  m.def(
      "ensemble_cost",
      [](const std::vector<double>& costs) { return ensemble_cost(CostTable(costs, 0)); },
      py::arg("costs"));

  m.def(
      "synthetic_accuracies",
      [](std::size_t rows, std::size_t apis, std::uint64_t seed) {
        return from_matrix(synthetic_accuracies(rows, apis, seed));
      },
      py::arg("rows"), py::arg("apis"), py::arg("seed"));
  m.def(
      "write_synthetic_fixture",
      [](const std::filesystem::path& records, const std::filesystem::path& costs, std::size_t items,
         std::size_t apis, std::uint64_t seed) {
        SyntheticDatasetSpec spec;
        spec.records = items;
        spec.apis = apis;
        const auto data = synthetic_dataset(spec, seed);
        save_records(records, data);
        std::ofstream out(costs);
        out << cost_table_json(synthetic_costs(apis), data.api_names) << '\n';
      },
      py::arg("records"), py::arg("costs"), py::arg("items") = 1000, py::arg("apis") = 4,
      py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
