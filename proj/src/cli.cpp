#include "frugalmct/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "frugalmct/base_search.hpp"
#include "frugalmct/baselines.hpp"
#include "frugalmct/pipeline.hpp"
#include "frugalmct/synthetic.hpp"
#include "json.hpp"

namespace frugalmct::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kTrainFraction = 0.5;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("FRUGAL_SEED"); env != nullptr && *env != '\0') {
    return std::stoull(env);
  }
  return 0;
}

// Flags shared by the commands that train.
struct DataFlags {
  std::string records;
  std::string costs;
  std::string embeddings;
  std::string base;
  std::string metric = "jaccard";
  std::uint64_t seed = 0;
  int trees = 100;
  int grid = 10;
};

void add_data_flags(CLI::App& cmd, DataFlags& f) {
  cmd.add_option("--records", f.records, "prediction log (JSONL)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--costs", f.costs, "cost table (JSON)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--embeddings", f.embeddings, "label embeddings (JSONL)")->check(CLI::ExistingFile);
  cmd.add_option("--base", f.base, "base API (default: the cost table's base)");
  cmd.add_option("--metric", f.metric, "accuracy metric")
      ->check(CLI::IsMember({"jaccard", "f1", "precision"}));
  cmd.add_option("--seed", f.seed, "random seed (default: $FRUGAL_SEED or 0)");
  cmd.add_option("--trees", f.trees, "trees in the accuracy forest")->check(CLI::PositiveNumber);
  cmd.add_option("--grid", f.grid, "combiner grid resolution")->check(CLI::NonNegativeNumber);
}

struct LoadedData {
  Dataset dataset;
  CostTable costs;
  std::optional<EmbeddingTable> embeddings;
  DatasetSplit parts;
  Featurizer featurizer;
};

LoadedData load_data(const DataFlags& f) {
  LoadedData d;
  d.dataset = load_records(f.records);
  d.costs = load_cost_table(f.costs, d.dataset.api_names);
  if (!f.base.empty()) d.costs = d.costs.with_base(d.dataset.api_index(f.base));
  if (!f.embeddings.empty()) d.embeddings = load_embeddings(f.embeddings);
  d.parts = split(d.dataset, kTrainFraction, f.seed);
  d.featurizer = make_featurizer(d.parts.train, d.embeddings);
  return d;
}

TrainOptions train_options(const DataFlags& f, double budget) {
  TrainOptions o;
  o.budget = budget;
  o.metric = f.metric;
  o.combiner_grid = f.grid;
  o.forest.num_trees = f.trees;
  o.seed = f.seed;
  return o;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::optional<fs::path> embeddings_path(const DataFlags& f) {
  if (f.embeddings.empty()) return std::nullopt;
  return fs::path(f.embeddings);
}

// train

struct TrainFlags {
  DataFlags data;
  double budget = 0.0;
  bool base_search = false;
  std::vector<std::string> candidates;
  std::string out;
  std::string report;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
  LoadedData d = load_data(f.data);
  TrainOptions options = train_options(f.data, f.budget);
  ordered_json summary;

  TrainedStrategy trained;
  if (f.base_search) {
    std::vector<ApiIndex> candidates;
    for (const auto& name : f.candidates) candidates.push_back(d.dataset.api_index(name));
    const auto report =
        search_base(d.parts.train, d.parts.validation, d.costs.costs(), d.featurizer, options, candidates);
    trained = *report.winning().trained;
    fs::path report_path = f.report;
    if (report_path.empty()) {
      report_path = fs::path(f.out);
      report_path.replace_extension(".base_search.json");
    }
    write_file(report_path, base_search_report_json(report, d.dataset.api_names).dump(2) + "\n");
    summary["base_search_report"] = report_path.string();
  } else {
    trained = train_strategy(d.parts.train, d.parts.validation, d.costs, d.featurizer, options);
  }
  save_strategy(f.out, trained.strategy, embeddings_path(f.data));

  const Strategy& s = trained.strategy;
  summary["strategy"] = f.out;
  summary["base"] = s.api_names[s.base()];
  summary["budget"] = s.budget;
  summary["p_hat"] = s.p_hat;
  summary["delta"] = s.delta;
  summary["validation_accuracy"] = trained.validation_accuracy;
  summary["validation_cost"] = trained.validation_cost;
  summary["validation_rmse"] = trained.validation_predictor.rmse;
  summary["validation_pcc"] = trained.validation_predictor.pcc;
  out << summary.dump(2) << '\n';
  return kOk;
}

// sweep

struct SweepFlags {
  DataFlags data;
  std::vector<double> budgets;
  bool with_dap = false;
  bool with_baselines = false;
  std::string out;
  std::string logs;
};

struct SweepRow {
  double budget;
  double realized_cost;
  double accuracy;
  std::string kind;
};

double mean_metric(std::span<const Record> records, Metric metric,
                   const std::function<LabelSet(const Record&)>& predict) {
  double total = 0.0;
  for (const auto& r : records) total += metric(r.truth, predict(r));
  return total / static_cast<double>(records.size());
}

std::vector<double> parse_budgets(const std::string& list) {
  std::vector<double> out;
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double b = 0.0;
    try {
      b = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument("bad budget '" + item + "'");
    }
    out.push_back(b);
  }
  return out;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  if (f.budgets.empty()) throw std::invalid_argument("empty budget list");
  LoadedData d = load_data(f.data);
  const Metric metric = metric_from_name(f.data.metric);
  const auto& test = d.parts.test.records;
  if (test.empty()) throw std::invalid_argument("test split is empty");
  for (double b : f.budgets) {
    if (b < d.costs.base_cost()) throw InfeasibleError("infeasible: budget below base cost");
  }

  TrainOptions options = train_options(f.data, f.budgets.front());
  const auto prepared = prepare_strategy(d.parts.train, d.parts.validation, d.costs, d.featurizer, options);
  std::optional<PreparedStrategy> prepared_dap;
  if (f.with_dap) {
    options.dummy_predictor = true;
    prepared_dap = prepare_strategy(d.parts.train, d.parts.validation, d.costs, d.featurizer, options);
  }
  const auto test_truth = strategy_true_accuracies(prepared.strategy, test);
  const auto test_estimates = strategy_predicted_accuracies(prepared.strategy, test);

  std::vector<SweepRow> rows;
  for (double b : f.budgets) {
    const auto trained = fit_budget(prepared, b);
    const auto online = replay(trained.strategy, test);
    rows.push_back({b, online.mean_cost, online.mean_accuracy, "online"});
    if (!f.logs.empty()) {
      std::ostringstream name;
      name << "online_" << std::setprecision(12) << b << ".csv";
      fs::create_directories(f.logs);
      write_file(fs::path(f.logs) / name.str(), assignment_log_csv(online, trained.strategy.api_names));
    }

    const auto offline = offline_strategy({test_estimates, d.costs, b});
    rows.push_back({b, strategy_cost(offline.assignments, d.costs),
                    mean_accuracy(offline.assignments, test_truth), "offline"});

    if (prepared_dap) {
      const auto dap = replay(fit_budget(*prepared_dap, b).strategy, test);
      rows.push_back({b, dap.mean_cost, dap.mean_accuracy, "dap_online"});
    }
  }

  std::vector<std::pair<std::string, std::pair<double, double>>> constant;  // kind -> (cost, accuracy)
  for (std::size_t k = 0; k < d.costs.size(); ++k) {
    const double acc =
        mean_metric(test, metric, [k](const Record& r) { return r.predictions[k].labels(); });
    constant.push_back({"single_api:" + d.dataset.api_names[k], {d.costs.cost(k), acc}});
  }
  if (f.with_baselines) {
    constant.push_back({"majority", {ensemble_cost(d.costs), mean_metric(test, metric, majority_vote)}});
    WeightedVoteParams params;
    params.weights = api_accuracy_weights(d.parts.train.records, metric);
    params.threshold = tune_vote_threshold(d.parts.train.records, params.weights, 100, metric);
    constant.push_back(
        {"weighted_majority",
         {ensemble_cost(d.costs),
          mean_metric(test, metric, [&](const Record& r) { return weighted_majority_vote(r, params); })}});
  }
  for (double b : f.budgets) {
    for (const auto& [kind, point] : constant) rows.push_back({b, point.first, point.second, kind});
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.budget < b.budget;
  });
  std::ostringstream csv;
  csv << std::setprecision(12) << "budget,realized_cost,accuracy,strategy_kind\n";
  for (const auto& r : rows) {
    csv << r.budget << ',' << r.realized_cost << ',' << r.accuracy << ',' << r.kind << '\n';
  }
  if (f.out.empty()) {
    out << csv.str();
  } else {
    write_file(f.out, csv.str());
  }
  return kOk;
}

// replay

struct ReplayFlags {
  std::string strategy;
  std::string records;
  std::string out;
  std::string summary;
};

int cmd_replay(const ReplayFlags& f, std::ostream& out) {
  const Strategy strategy = load_strategy(f.strategy);
  const Dataset data = load_records(f.records);
  if (data.api_names != strategy.api_names) {
    throw FormatError("records do not match the strategy's API set");
  }
  const auto result = replay(strategy, data.records);
  const auto log = assignment_log_csv(result, strategy.api_names);
  if (f.out.empty()) {
    out << log;
  } else {
    write_file(f.out, log);
  }

  ordered_json summary;
  summary["items"] = result.steps.size();
  auto& fractions = summary["call_fraction"] = ordered_json::object();
  for (std::size_t k = 0; k < strategy.api_names.size(); ++k) {
    fractions[strategy.api_names[k]] = result.call_fraction[k];
  }
  summary["mean_accuracy"] = result.mean_accuracy;
  summary["mean_cost"] = result.mean_cost;
  summary["budget"] = strategy.budget;
  if (!f.summary.empty()) write_file(f.summary, summary.dump(2) + "\n");
  if (!f.out.empty()) out << summary.dump(2) << '\n';
  return kOk;
}

// diagnose

struct DiagnoseFlags {
  DataFlags data;
  std::string out;
};

int cmd_diagnose(const DiagnoseFlags& f, std::ostream& out) {
  LoadedData d = load_data(f.data);
  const Metric metric = metric_from_name(f.data.metric);
  const auto& train = d.parts.train.records;
  const auto& test = d.parts.test.records;
  if (test.empty()) throw std::invalid_argument("test split is empty");
  const ApiIndex base = d.costs.base();

  const auto combiner = tune_all_combiners(train, base, f.data.grid, metric);
  const auto train_truth = true_accuracy_matrix(train, base, combiner, metric);
  const auto test_truth = true_accuracy_matrix(test, base, combiner, metric);
  const auto train_x = d.featurizer.featurize(train, base);
  const auto test_x = d.featurizer.featurize(test, base);
  ForestParams forest;
  forest.num_trees = f.data.trees;
  const auto forest_q =
      evaluate_predictor(fit_forest(train_x, train_truth, forest, f.data.seed), test_x, test_truth);
  const auto dummy_q =
      evaluate_predictor(fit_dummy(train_truth, d.featurizer.dimension()), test_x, test_truth);

  ordered_json report;
  report["base"] = d.dataset.api_names[base];
  report["metric"] = f.data.metric;
  report["test_items"] = test.size();
  report["predictor"] = {{"forest", {{"rmse", forest_q.rmse}, {"pcc", forest_q.pcc}}},
                         {"dummy", {{"rmse", dummy_q.rmse}, {"pcc", dummy_q.pcc}}}};

  auto& apis = report["apis"] = ordered_json::object();
  for (std::size_t k = 0; k < d.costs.size(); ++k) {
    std::vector<LabelSetPair> pairs;
    double acc = 0.0;
    for (const auto& r : test) {
      pairs.push_back({r.truth, r.predictions[k].labels()});
      acc += metric(r.truth, pairs.back().pred);
    }
    ordered_json per_label = ordered_json::object();
    for (const auto& [label, pr] : precision_recall_per_label(pairs)) {
      per_label[label] = {{"precision", pr.precision}, {"recall", pr.recall}};
    }
    apis[d.dataset.api_names[k]] = {{"cost", d.costs.cost(k)},
                                    {"accuracy", acc / static_cast<double>(test.size())},
                                    {"labels", std::move(per_label)}};
  }

  WeightedVoteParams params;
  params.weights = api_accuracy_weights(train, metric);
  params.threshold = tune_vote_threshold(train, params.weights, 100, metric);
  double majority = 0.0;
  double weighted = 0.0;
  for (const auto& r : test) {
    majority += metric(r.truth, majority_vote(r));
    weighted += metric(r.truth, weighted_majority_vote(r, params));
  }
  const double n = static_cast<double>(test.size());
  report["baselines"] = {
      {"cost", ensemble_cost(d.costs)},
      {"majority", {{"accuracy", majority / n}}},
      {"weighted_majority", {{"accuracy", weighted / n}, {"threshold", params.threshold}}}};

  if (f.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    write_file(f.out, report.dump(2) + "\n");
  }
  return kOk;
}

// synth

struct SynthFlags {
  SyntheticDatasetSpec spec;
  std::uint64_t seed = 0;
  std::string records;
  std::string costs;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  const Dataset data = synthetic_dataset(f.spec, f.seed);
  save_records(f.records, data);
  write_file(f.costs, cost_table_json(synthetic_costs(f.spec.apis), data.api_names) + "\n");
  out << "wrote " << data.size() << " records for " << data.num_apis() << " APIs\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budget-aware selection of multi-label prediction APIs"};
  app.require_subcommand(1);
  const std::uint64_t seed = default_seed();

  TrainFlags train;
  train.data.seed = seed;
  auto* train_cmd = app.add_subcommand("train", "train a strategy for one budget");
  add_data_flags(*train_cmd, train.data);
  train_cmd->add_option("--budget", train.budget, "per-query budget")->required();
  train_cmd->add_flag("--base-search", train.base_search, "try each candidate as the base API");
  train_cmd->add_option("--candidates", train.candidates, "base-search candidates (default: all)")
      ->delimiter(',');
  train_cmd->add_option("--report", train.report, "base-search report path");
  train_cmd->add_option("--out", train.out, "strategy file")->required();

  SweepFlags sweep;
  sweep.data.seed = seed;
  auto* sweep_cmd = app.add_subcommand("sweep", "accuracy/cost table over budgets");
  add_data_flags(*sweep_cmd, sweep.data);
  std::string budget_list;
  sweep_cmd->add_option("--budgets", budget_list, "comma-separated budgets")->required();
  sweep_cmd->add_flag("--with-dap", sweep.with_dap, "add the dummy-predictor ablation");
  sweep_cmd->add_flag("--with-baselines", sweep.with_baselines, "add the voting baselines");
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default: stdout)");
  sweep_cmd->add_option("--logs", sweep.logs, "directory for per-budget online assignment logs");

  ReplayFlags rep;
  auto* replay_cmd = app.add_subcommand("replay", "stream records through a trained strategy");
  replay_cmd->add_option("--strategy", rep.strategy)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--records", rep.records)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", rep.out, "assignment log CSV (default: stdout)");
  replay_cmd->add_option("--summary", rep.summary, "summary JSON path");

  DiagnoseFlags diag;
  diag.data.seed = seed;
  auto* diag_cmd = app.add_subcommand("diagnose", "predictor and baseline diagnostics");
  add_data_flags(*diag_cmd, diag.data);
  diag_cmd->add_option("--out", diag.out, "report JSON path (default: stdout)");

  SynthFlags synth;
  synth.seed = seed;
  auto* synth_cmd = app.add_subcommand("synth", "write a seeded synthetic fixture");
  synth_cmd->add_option("--records", synth.records, "output JSONL")->required();
  synth_cmd->add_option("--costs", synth.costs, "output cost table")->required();
  synth_cmd->add_option("--items", synth.spec.records)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--apis", synth.spec.apis)->check(CLI::Range(2, 64));
  synth_cmd->add_option("--seed", synth.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kError;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*sweep_cmd) {
      sweep.budgets = parse_budgets(budget_list);
      return cmd_sweep(sweep, out);
    }
    if (*replay_cmd) return cmd_replay(rep, out);
    if (*diag_cmd) return cmd_diagnose(diag, out);
    if (*synth_cmd) return cmd_synth(synth, out);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"frugalmct"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace frugalmct::cli
