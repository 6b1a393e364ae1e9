#include "frugalmct/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace frugalmct {

namespace {

constexpr int kStrategyFormat = 1;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Featurizer make_featurizer(const Dataset& train, const std::optional<EmbeddingTable>& embeddings) {
  if (embeddings) return Featurizer::unbounded(*embeddings);
  return Featurizer::bounded(build_vocabulary(train.records));
}

AccuracyMatrix strategy_true_accuracies(const Strategy& strategy, std::span<const Record> records) {
  return true_accuracy_matrix(records, strategy.base(), strategy.combiner,
                              metric_from_name(strategy.metric));
}

AccuracyMatrix strategy_predicted_accuracies(const Strategy& strategy,
                                             std::span<const Record> records) {
  return predict_all(strategy.model, strategy.featurizer.featurize(records, strategy.base()));
}

PreparedStrategy prepare_strategy(const Dataset& train, const Dataset& validation,
                                  const CostTable& costs, const Featurizer& featurizer,
                                  const TrainOptions& options) {
  if (train.records.empty() || validation.records.empty()) {
    throw std::invalid_argument("training and validation sets must be non-empty");
  }
  if (costs.size() != train.num_apis()) throw std::invalid_argument("cost table does not match the APIs");
  const Metric metric = metric_from_name(options.metric);
  const ApiIndex base = costs.base();

  PreparedStrategy out;
  Strategy& s = out.strategy;
  s.api_names = train.api_names;
  s.costs = costs;
  s.metric = options.metric;
  s.featurizer = featurizer;
  s.combiner = tune_all_combiners(train.records, base, options.combiner_grid, metric);

  const auto train_truth = true_accuracy_matrix(train.records, base, s.combiner, metric);
  out.validation_truth = true_accuracy_matrix(validation.records, base, s.combiner, metric);
  const auto train_x = featurizer.featurize(train.records, base);
  const auto val_x = featurizer.featurize(validation.records, base);

  if (options.dummy_predictor) {
    s.model = fit_dummy(train_truth, featurizer.dimension());
    out.train_estimates = predict_all(s.model, train_x);
  } else {
    s.model = fit_forest(train_x, train_truth, options.forest, options.seed, &out.train_estimates);
  }
  out.validation_estimates = predict_all(s.model, val_x);
  out.validation_predictor = compare_accuracies(out.validation_estimates, out.validation_truth);
  return out;
}

TrainedStrategy fit_budget(const PreparedStrategy& prepared, double budget,
                           std::optional<double> fixed_delta) {
  const CostTable& costs = prepared.strategy.costs;
  if (budget < costs.base_cost()) throw InfeasibleError("infeasible: budget below base cost");
  TrainedStrategy out;
  out.strategy = prepared.strategy;
  out.validation_predictor = prepared.validation_predictor;
  Strategy& s = out.strategy;
  s.budget = budget;

  const SelectionInstance train_instance{prepared.train_estimates, costs, budget};
  const SelectionInstance val_instance{prepared.validation_estimates, costs, budget};
  if (fixed_delta) {
    s.delta = *fixed_delta;
  } else {
    out.delta_tuning = tune_delta(train_instance, val_instance, budget, &prepared.validation_truth);
    s.delta = out.delta_tuning.delta;
  }
  s.p_hat = estimate_p_hat(train_instance, budget, s.delta);

  const std::size_t n = prepared.validation_estimates.rows();
  OnlinePolicy policy{s.p_hat, s.delta, costs.base(), 0.0};
  const auto chosen = run_online(prepared.validation_estimates, policy, n, budget, costs);
  out.validation_accuracy = mean_accuracy(chosen, prepared.validation_truth);
  out.validation_cost = strategy_cost(chosen, costs);
  return out;
}

TrainedStrategy train_strategy(const Dataset& train, const Dataset& validation,
                               const CostTable& costs, const Featurizer& featurizer,
                               const TrainOptions& options) {
  if (options.budget < costs.base_cost()) throw InfeasibleError("infeasible: budget below base cost");
  return fit_budget(prepare_strategy(train, validation, costs, featurizer, options), options.budget,
                    options.fixed_delta);
}

ReplayResult replay(const Strategy& strategy, std::span<const Record> records) {
  if (records.empty()) throw std::invalid_argument("nothing to replay");
  for (const auto& r : records) {
    if (r.num_apis() != strategy.api_names.size()) {
      throw std::invalid_argument("records do not match the strategy's API set");
    }
  }
  const Metric metric = metric_from_name(strategy.metric);
  const ApiIndex base = strategy.base();
  OnlineSelector selector(strategy.p_hat, records.size(), strategy.budget, strategy.costs);

  ReplayResult out;
  out.call_fraction.assign(strategy.api_names.size(), 0.0);
  std::vector<double> estimate(strategy.model.output_dim());
  double total_accuracy = 0.0;
  for (const auto& record : records) {
    strategy.model.predict_into(strategy.featurizer(record.predictions.at(base)), estimate);
    ReplayStep step;
    step.id = record.id;
    step.chosen = selector.step(estimate);
    step.addon_cost = strategy.costs.hatted_cost(step.chosen);
    step.cumulative_spend = selector.spent();
    step.predicted_accuracy = estimate[step.chosen];
    step.true_accuracy =
        metric(record.truth,
               combine_and_predict(record, base, step.chosen, strategy.combiner.at(step.chosen)));
    total_accuracy += step.true_accuracy;
    out.call_fraction[step.chosen] += 1.0;
    out.steps.push_back(std::move(step));
  }
  selector.finish();
  const auto n = static_cast<double>(records.size());
  for (auto& f : out.call_fraction) f /= n;
  out.mean_accuracy = total_accuracy / n;
  out.mean_cost = strategy.costs.base_cost() + selector.spent() / n;
  return out;
}

void save_strategy(const std::filesystem::path& path, const Strategy& strategy,
                   const std::optional<std::filesystem::path>& embeddings_path) {
  auto model_path = path;
  model_path.replace_extension(".model.json");
  nlohmann::ordered_json j;
  j["format"] = kStrategyFormat;
  j["apis"] = strategy.api_names;
  j["base"] = strategy.api_names.at(strategy.base());
  j["budget"] = strategy.budget;
  j["p_hat"] = strategy.p_hat;
  j["delta"] = strategy.delta;
  j["metric"] = strategy.metric;
  auto& costs = j["costs"];
  costs["apis"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < strategy.api_names.size(); ++k) {
    costs["apis"][strategy.api_names[k]] = strategy.costs.cost(k);
  }
  costs["base"] = strategy.api_names.at(strategy.base());
  costs["price_unit"] = "per_query";
  auto& combiner = j["combiner"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < strategy.api_names.size(); ++k) {
    combiner[strategy.api_names[k]] = {{"w", strategy.combiner.at(k).w},
                                       {"theta", strategy.combiner.at(k).theta}};
  }
  auto& feat = j["featurizer"];
  if (strategy.featurizer.scheme() == FeatureScheme::one_hot_bounded) {
    feat["scheme"] = "one_hot_bounded";
    feat["vocabulary"] = strategy.featurizer.vocabulary();
  } else {
    if (!embeddings_path) throw std::invalid_argument("embedding strategies need the embeddings path");
    feat["scheme"] = "embedding_weighted";
    feat["embeddings"] = std::filesystem::absolute(*embeddings_path).string();
  }
  j["model"] = model_path.filename().string();

  std::ofstream model_out(model_path);
  if (!model_out) throw std::runtime_error("cannot write " + model_path.string());
  model_out << strategy.model.to_json().dump() << '\n';
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Strategy load_strategy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw FormatError("strategy file: " + std::string(e.what()));
  }
  if (j.value("format", 0) != kStrategyFormat) throw FormatError("unsupported strategy format");

  Strategy s;
  s.api_names = j.at("apis").get<std::vector<std::string>>();
  s.costs = parse_cost_table(j.at("costs").dump(), s.api_names);
  s.budget = j.at("budget").get<double>();
  s.p_hat = j.at("p_hat").get<double>();
  s.delta = j.at("delta").get<double>();
  s.metric = j.at("metric").get<std::string>();
  for (const auto& name : s.api_names) {
    const auto& c = j.at("combiner").at(name);
    s.combiner.push_back({c.at("w").get<double>(), c.at("theta").get<double>()});
  }
  const auto& feat = j.at("featurizer");
  const auto scheme = feat.at("scheme").get<std::string>();
  if (scheme == "one_hot_bounded") {
    s.featurizer = Featurizer::bounded(feat.at("vocabulary").get<std::vector<Label>>());
  } else if (scheme == "embedding_weighted") {
    s.featurizer = Featurizer::unbounded(load_embeddings(feat.at("embeddings").get<std::string>()));
  } else {
    throw FormatError("unknown feature scheme '" + scheme + "'");
  }
  const auto model_path = path.parent_path() / j.at("model").get<std::string>();
  std::ifstream model_in(model_path);
  if (!model_in) throw std::runtime_error("cannot open " + model_path.string());
  s.model = AccuracyModel::from_json(nlohmann::json::parse(model_in));
  if (s.model.output_dim() != s.api_names.size()) throw FormatError("model does not match the API set");
  if (s.model.kind() == AccuracyModel::Kind::forest &&
      s.model.input_dim() != s.featurizer.dimension()) {
    throw FormatError("model does not match the feature dimension");
  }
  return s;
}

std::string assignment_log_csv(const ReplayResult& result, const std::vector<std::string>& api_names) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "id,chosen_api,addon_cost,cumulative_spend,predicted_accuracy\n";
  for (const auto& step : result.steps) {
    out << csv_field(step.id) << ',' << csv_field(api_names.at(step.chosen)) << ','
        << step.addon_cost << ',' << step.cumulative_spend << ',' << step.predicted_accuracy << '\n';
  }
  return out.str();
}

}  // namespace frugalmct
