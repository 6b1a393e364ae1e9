#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frugalmct/combiner.hpp"
#include "frugalmct/core.hpp"
#include "frugalmct/ingestion.hpp"
#include "frugalmct/predictor.hpp"
#include "frugalmct/selector.hpp"

namespace frugalmct {

struct TrainOptions {
  double budget = 0.0;
  std::string metric = "jaccard";
  int combiner_grid = 10;
  ForestParams forest;
  bool dummy_predictor = false;
  // Use this delta instead of tuning it on the validation set.
  std::optional<double> fixed_delta;
  std::uint64_t seed = 0;
};

// Everything needed to run the selector on new inputs.
struct Strategy {
  std::vector<std::string> api_names;
  CostTable costs;  // base included
  double budget = 0.0;
  double p_hat = 0.0;
  double delta = 0.0;
  std::string metric = "jaccard";
  std::vector<CombinerParams> combiner;  // one per API, paired with the base
  Featurizer featurizer;
  AccuracyModel model;

  ApiIndex base() const { return costs.base(); }
};

struct TrainedStrategy {
  Strategy strategy;
  double validation_accuracy = 0.0;
  double validation_cost = 0.0;
  DeltaTuning delta_tuning;
  PredictorQuality validation_predictor;
};

// Featurizer for the data: embeddings when given, otherwise the training vocabulary.
Featurizer make_featurizer(const Dataset& train, const std::optional<EmbeddingTable>& embeddings);

// Budget-independent part of training: combiner tuning, true accuracy vectors and
// the accuracy predictor, plus its estimates on both sets.
struct PreparedStrategy {
  Strategy strategy;  // budget, delta and p_hat not yet set
  AccuracyMatrix train_estimates;  // out-of-bag for forests
  AccuracyMatrix validation_estimates;
  AccuracyMatrix validation_truth;
  PredictorQuality validation_predictor;
};

PreparedStrategy prepare_strategy(const Dataset& train, const Dataset& validation,
                                  const CostTable& costs, const Featurizer& featurizer,
                                  const TrainOptions& options);

// Tunes delta on validation (unless fixed) and fits p_hat for one budget.
TrainedStrategy fit_budget(const PreparedStrategy& prepared, double budget,
                           std::optional<double> fixed_delta = std::nullopt);

// prepare_strategy followed by fit_budget at options.budget. `costs` fixes the
// base API.
TrainedStrategy train_strategy(const Dataset& train, const Dataset& validation,
                               const CostTable& costs, const Featurizer& featurizer,
                               const TrainOptions& options);

// True accuracy of every base+k combination under the strategy's combiner.
AccuracyMatrix strategy_true_accuracies(const Strategy& strategy, std::span<const Record> records);
AccuracyMatrix strategy_predicted_accuracies(const Strategy& strategy,
                                             std::span<const Record> records);

struct ReplayStep {
  std::string id;
  ApiIndex chosen = 0;
  double addon_cost = 0.0;
  double cumulative_spend = 0.0;
  double predicted_accuracy = 0.0;
  double true_accuracy = 0.0;
};

struct ReplayResult {
  std::vector<ReplayStep> steps;
  std::vector<double> call_fraction;  // per API
  double mean_accuracy = 0.0;
  double mean_cost = 0.0;  // per query, base included
};

// Streams the records through the online selector with a per-query budget of
// strategy.budget over N = records.size().
ReplayResult replay(const Strategy& strategy, std::span<const Record> records);

// Strategy file: JSON with the model stored in a sibling file named by "model".
void save_strategy(const std::filesystem::path& path, const Strategy& strategy,
                   const std::optional<std::filesystem::path>& embeddings_path = std::nullopt);
Strategy load_strategy(const std::filesystem::path& path);

// Assignment log CSV: id,chosen_api,addon_cost,cumulative_spend,predicted_accuracy
std::string assignment_log_csv(const ReplayResult& result, const std::vector<std::string>& api_names);

}  // namespace frugalmct
