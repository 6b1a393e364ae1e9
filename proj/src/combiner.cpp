#include "frugalmct/combiner.hpp"

#include <algorithm>
#include <stdexcept>

namespace frugalmct {

namespace {

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

// Grid scores compare equal within this tolerance before the tie-break applies.
constexpr double kTieTolerance = 1e-12;

}  // namespace

ScoredLabelSet combine_scores(const ScoredLabelSet& base_set, const ScoredLabelSet& addon_set,
                              double w) {
  check_unit_interval(w, "combiner weight");
  ScoredLabelSet out;
  auto mix = [w](double b, double a) { return std::clamp(w * b + (1.0 - w) * a, 0.0, 1.0); };
  for (const auto& [label, score] : base_set) out.set(label, mix(score, addon_set.score(label)));
  for (const auto& [label, score] : addon_set) {
    if (!base_set.contains(label)) out.set(label, mix(0.0, score));
  }
  return out;
}

LabelSet apply_threshold(const ScoredLabelSet& scored, double theta) {
  check_unit_interval(theta, "threshold");
  LabelSet out;
  for (const auto& [label, score] : scored) {
    if (score > theta) out.insert(out.end(), label);
  }
  return out;
}

LabelSet combine_and_predict(const Record& record, ApiIndex base, ApiIndex addon,
                             const CombinerParams& params) {
  const auto& base_set = record.predictions.at(base);
  if (addon == base) return apply_threshold(base_set, params.theta);
  return apply_threshold(combine_scores(base_set, record.predictions.at(addon), params.w),
                         params.theta);
}

CombinerParams tune_combiner(std::span<const Record> train, ApiIndex base, ApiIndex addon,
                             int grid_resolution, Metric metric) {
  if (train.empty()) throw std::invalid_argument("cannot tune the combiner on an empty set");
  if (grid_resolution < 0) throw std::invalid_argument("grid resolution must be non-negative");
  const int m = grid_resolution;
  auto grid_value = [m](int i) { return m == 0 ? 0.0 : static_cast<double>(i) / m; };

  // mean_metric[wi][ti]
  std::vector<std::vector<double>> mean_metric(m + 1, std::vector<double>(m + 1, 0.0));
  for (int wi = 0; wi <= m; ++wi) {
    const double w = grid_value(wi);
    if (addon == base && wi > 0) {
      mean_metric[wi] = mean_metric[0];
      continue;
    }
    for (const auto& record : train) {
      const auto& base_set = record.predictions.at(base);
      const ScoredLabelSet combined =
          addon == base ? base_set : combine_scores(base_set, record.predictions.at(addon), w);
      for (int ti = 0; ti <= m; ++ti) {
        mean_metric[wi][ti] += metric(record.truth, apply_threshold(combined, grid_value(ti)));
      }
    }
    for (auto& v : mean_metric[wi]) v /= static_cast<double>(train.size());
  }

  CombinerParams best;
  double best_value = -1.0;
  for (int ti = 0; ti <= m; ++ti) {
    for (int wi = 0; wi <= m; ++wi) {
      if (mean_metric[wi][ti] > best_value + kTieTolerance) {
        best_value = mean_metric[wi][ti];
        best = {grid_value(wi), grid_value(ti)};
      }
    }
  }
  return best;
}

std::vector<CombinerParams> tune_all_combiners(std::span<const Record> train, ApiIndex base,
                                               int grid_resolution, Metric metric) {
  if (train.empty()) throw std::invalid_argument("cannot tune the combiner on an empty set");
  std::vector<CombinerParams> out;
  for (ApiIndex k = 0; k < train.front().num_apis(); ++k) {
    out.push_back(tune_combiner(train, base, k, grid_resolution, metric));
  }
  return out;
}

AccuracyVector true_accuracy_vector(const Record& record, ApiIndex base,
                                    std::span<const CombinerParams> params_per_api,
                                    Metric metric) {
  if (params_per_api.size() != record.num_apis()) {
    throw std::invalid_argument("need one combiner setting per API");
  }
  AccuracyVector out(record.num_apis());
  for (ApiIndex k = 0; k < out.size(); ++k) {
    out[k] = metric(record.truth, combine_and_predict(record, base, k, params_per_api[k]));
  }
  return out;
}

AccuracyMatrix true_accuracy_matrix(std::span<const Record> records, ApiIndex base,
                                    std::span<const CombinerParams> params_per_api,
                                    Metric metric) {
  AccuracyMatrix out(records.size(), params_per_api.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto row = true_accuracy_vector(records[n], base, params_per_api, metric);
    std::copy(row.begin(), row.end(), out.row(n).begin());
  }
  return out;
}

}  // namespace frugalmct
