#include "frugalmct/baselines.hpp"

#include <map>
#include <stdexcept>

namespace frugalmct {

LabelSet majority_vote(const Record& record) {
  const std::size_t k = record.num_apis();
  if (k == 0) throw std::invalid_argument("majority vote needs at least one API");
  const std::size_t needed = (k + 1) / 2;
  std::map<Label, std::size_t> votes;
  for (const auto& prediction : record.predictions) {
    for (const auto& [label, score] : prediction) ++votes[label];
  }
  LabelSet out;
  for (const auto& [label, count] : votes) {
    if (count >= needed) out.insert(out.end(), label);
  }
  return out;
}

LabelSet weighted_majority_vote(const Record& record, const WeightedVoteParams& params) {
  if (params.weights.size() != record.num_apis()) {
    throw std::invalid_argument("need one vote weight per API");
  }
  std::map<Label, double> score;
  for (std::size_t k = 0; k < record.num_apis(); ++k) {
    if (!(params.weights[k] >= 0.0)) throw std::invalid_argument("vote weights must be non-negative");
    for (const auto& [label, s] : record.predictions[k]) score[label] += params.weights[k] * s;
  }
  LabelSet out;
  for (const auto& [label, s] : score) {
    if (s > params.threshold) out.insert(out.end(), label);
  }
  return out;
}

std::vector<double> api_accuracy_weights(std::span<const Record> train, Metric metric) {
  if (train.empty()) throw std::invalid_argument("no training records");
  std::vector<double> out(train.front().num_apis(), 0.0);
  for (const auto& r : train) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += metric(r.truth, r.predictions[k].labels());
  }
  for (auto& w : out) w /= static_cast<double>(train.size());
  return out;
}

double tune_vote_threshold(std::span<const Record> train, std::span<const double> weights,
                           int grid_resolution, Metric metric) {
  if (train.empty()) throw std::invalid_argument("no training records");
  if (grid_resolution < 1) throw std::invalid_argument("grid resolution must be at least 1");
  WeightedVoteParams params{{weights.begin(), weights.end()}, 0.0};
  double best_threshold = 0.0;
  double best_value = -1.0;
  for (int m = 0; m <= grid_resolution; ++m) {
    params.threshold = static_cast<double>(m) / grid_resolution;
    double total = 0.0;
    for (const auto& r : train) total += metric(r.truth, weighted_majority_vote(r, params));
    const double mean = total / static_cast<double>(train.size());
    if (mean > best_value + 1e-12) {
      best_value = mean;
      best_threshold = params.threshold;
    }
  }
  return best_threshold;
}

double ensemble_cost(const CostTable& costs) { return costs.total_cost(); }

}  // namespace frugalmct
