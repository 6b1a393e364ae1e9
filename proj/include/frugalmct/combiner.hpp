#pragma once

#include <span>
#include <vector>

#include "frugalmct/core.hpp"

namespace frugalmct {

// Weight on the base API's scores and the confidence cut applied after merging.
struct CombinerParams {
  double w = 0.0;
  double theta = 0.0;

  friend bool operator==(const CombinerParams&, const CombinerParams&) = default;
};

// Union of both label sets, each label scored w*base + (1-w)*addon (absent = 0).
ScoredLabelSet combine_scores(const ScoredLabelSet& base_set, const ScoredLabelSet& addon_set,
                              double w);

// Labels whose score is strictly above theta.
LabelSet apply_threshold(const ScoredLabelSet& scored, double theta);

// Final label set when `addon` is called after `base`. With addon == base only the
// threshold is applied.
LabelSet combine_and_predict(const Record& record, ApiIndex base, ApiIndex addon,
                             const CombinerParams& params);

// Exhaustive search over {m/M} x {m/M} maximizing the mean metric on `train`.
// Ties go to the smaller theta, then the smaller w.
CombinerParams tune_combiner(std::span<const Record> train, ApiIndex base, ApiIndex addon,
                             int grid_resolution, Metric metric);

// One tuned (w, theta) per API, paired with `base`.
std::vector<CombinerParams> tune_all_combiners(std::span<const Record> train, ApiIndex base,
                                               int grid_resolution, Metric metric);

// Accuracy of every base+k combination on one record.
AccuracyVector true_accuracy_vector(const Record& record, ApiIndex base,
                                    std::span<const CombinerParams> params_per_api,
                                    Metric metric);

AccuracyMatrix true_accuracy_matrix(std::span<const Record> records, ApiIndex base,
                                    std::span<const CombinerParams> params_per_api,
                                    Metric metric);

}  // namespace frugalmct
