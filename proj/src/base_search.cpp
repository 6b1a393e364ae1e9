#include "frugalmct/base_search.hpp"

#include <numeric>

namespace frugalmct {

const BaseCandidate& BaseSearchReport::winning() const {
  for (const auto& c : candidates) {
    if (c.base == winner) return c;
  }
  throw std::logic_error("winner missing from report");
}

BaseSearchReport search_base(const Dataset& train, const Dataset& validation,
                             std::span<const double> costs, const Featurizer& featurizer,
                             const TrainOptions& options, std::span<const ApiIndex> candidates) {
  std::vector<ApiIndex> all(costs.size());
  std::iota(all.begin(), all.end(), ApiIndex{0});
  if (candidates.empty()) candidates = all;

  BaseSearchReport report;
  const BaseCandidate* best = nullptr;
  for (ApiIndex base : candidates) {
    if (base >= costs.size()) throw std::out_of_range("candidate base out of range");
    BaseCandidate c;
    c.base = base;
    c.feasible = costs[base] <= options.budget;
    if (c.feasible) {
      const CostTable table({costs.begin(), costs.end()}, base);
      c.trained = train_strategy(train, validation, table, featurizer, options);
      c.validation_accuracy = c.trained->validation_accuracy;
      c.validation_cost = c.trained->validation_cost;
    }
    report.candidates.push_back(std::move(c));
  }
  for (const auto& c : report.candidates) {
    if (!c.feasible) continue;
    const bool better =
        best == nullptr || c.validation_accuracy > best->validation_accuracy + 1e-12 ||
        (c.validation_accuracy >= best->validation_accuracy - 1e-12 &&
         (costs[c.base] < costs[best->base] ||
          (costs[c.base] == costs[best->base] && c.base < best->base)));
    if (better) best = &c;
  }
  if (best == nullptr) throw InfeasibleError("infeasible: no candidate base fits the budget");
  report.winner = best->base;
  return report;
}

nlohmann::json base_search_report_json(const BaseSearchReport& report,
                                       const std::vector<std::string>& api_names) {
  nlohmann::json j;
  j["winner"] = api_names.at(report.winner);
  auto& rows = j["candidates"] = nlohmann::json::array();
  for (const auto& c : report.candidates) {
    nlohmann::json row{{"base", api_names.at(c.base)}, {"feasible", c.feasible}};
    if (c.feasible) {
      row["validation_accuracy"] = c.validation_accuracy;
      row["validation_cost"] = c.validation_cost;
      row["p_hat"] = c.trained->strategy.p_hat;
      row["delta"] = c.trained->strategy.delta;
    }
    rows.push_back(std::move(row));
  }
  return j;
}

}  // namespace frugalmct
