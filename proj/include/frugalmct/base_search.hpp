#pragma once

#include <optional>
#include <span>
#include <vector>

#include "frugalmct/pipeline.hpp"

namespace frugalmct {

struct BaseCandidate {
  ApiIndex base = 0;
  bool feasible = false;  // base cost <= budget
  double validation_accuracy = 0.0;
  double validation_cost = 0.0;
  std::optional<TrainedStrategy> trained;  // set for feasible candidates
};

struct BaseSearchReport {
  std::vector<BaseCandidate> candidates;
  ApiIndex winner = 0;

  const BaseCandidate& winning() const;
};

// Trains a full strategy per candidate base and keeps the most accurate one on
// validation (ties: cheaper base, then smaller index). Candidates that cost more
// than the budget are skipped. An empty candidate list means every API.
BaseSearchReport search_base(const Dataset& train, const Dataset& validation,
                             std::span<const double> costs, const Featurizer& featurizer,
                             const TrainOptions& options, std::span<const ApiIndex> candidates = {});

nlohmann::json base_search_report_json(const BaseSearchReport& report,
                                       const std::vector<std::string>& api_names);

}  // namespace frugalmct
