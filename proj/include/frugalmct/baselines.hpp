#pragma once

#include <span>
#include <vector>

#include "frugalmct/core.hpp"

namespace frugalmct {

// Ensemble baselines that call every API on every input.

// Keeps a label reported (with any score) by at least ceil(K/2) APIs.
LabelSet majority_vote(const Record& record);

struct WeightedVoteParams {
  std::vector<double> weights;  // per API, usually its training accuracy
  double threshold = 0.0;
};

// Keeps a label when sum_k weights[k] * score_k(label) > threshold.
LabelSet weighted_majority_vote(const Record& record, const WeightedVoteParams& params);

// Mean metric of each API's raw label set against the truth.
std::vector<double> api_accuracy_weights(std::span<const Record> train, Metric metric);

// Best threshold on {m/M} for the weighted vote; ties go to the smaller threshold.
double tune_vote_threshold(std::span<const Record> train, std::span<const double> weights,
                           int grid_resolution, Metric metric = &multilabel_accuracy);

// Per-query cost of calling every API.
double ensemble_cost(const CostTable& costs);

}  // namespace frugalmct
