#include "frugalmct/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace frugalmct {

Dataset synthetic_dataset(const SyntheticDatasetSpec& spec, std::uint64_t seed) {
  if (spec.apis < 2 || spec.categories == 0 || spec.labels_per_category == 0) {
    throw std::invalid_argument("synthetic dataset needs >= 2 APIs and a non-empty label space");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t num_labels = spec.categories * spec.labels_per_category;
  auto label_name = [](std::size_t i) { return "label_" + std::to_string(i); };

  // skill[k][c]: chance that API k reports a true label of category c.
  std::vector<std::vector<double>> skill(spec.apis, std::vector<double>(spec.categories));
  for (std::size_t k = 0; k < spec.apis; ++k) {
    const double centre = 0.35 + 0.45 * static_cast<double>(k) / static_cast<double>(spec.apis - 1);
    for (auto& s : skill[k]) s = std::clamp(centre + 0.5 * (unit(rng) - 0.5), 0.05, 0.98);
  }

  Dataset ds;
  for (std::size_t k = 0; k < spec.apis; ++k) ds.api_names.push_back("api_" + std::to_string(k));
  std::uniform_int_distribution<std::size_t> pick_category(0, spec.categories - 1);
  std::uniform_int_distribution<std::size_t> pick_label(0, num_labels - 1);
  for (std::size_t n = 0; n < spec.records; ++n) {
    Record r;
    r.id = "s" + std::to_string(n);
    const std::size_t c = pick_category(rng);
    const std::size_t first = c * spec.labels_per_category;
    for (std::size_t i = 0; i < spec.labels_per_category; ++i) {
      if (unit(rng) < 0.5) r.truth.insert(label_name(first + i));
    }
    if (r.truth.empty()) r.truth.insert(label_name(first + pick_label(rng) % spec.labels_per_category));

    for (std::size_t k = 0; k < spec.apis; ++k) {
      ScoredLabelSet pred;
      const double s = skill[k][c];
      for (const auto& label : r.truth) {
        if (unit(rng) < s) pred.set(label, 0.4 + 0.6 * unit(rng));
      }
      // False positives: one from the same category (reveals it), one from anywhere.
      if (unit(rng) < 1.0 - s) {
        const auto wrong = label_name(first + pick_label(rng) % spec.labels_per_category);
        if (!r.truth.contains(wrong)) pred.set(wrong, 0.1 + 0.5 * unit(rng));
      }
      if (unit(rng) < 0.5 * (1.0 - s)) {
        const auto wrong = label_name(pick_label(rng));
        if (!r.truth.contains(wrong) && !pred.contains(wrong)) pred.set(wrong, 0.05 + 0.4 * unit(rng));
      }
      r.predictions.push_back(std::move(pred));
    }
    ds.records.push_back(std::move(r));
  }
  ds.label_vocabulary = build_vocabulary(ds.records);
  return ds;
}

CostTable synthetic_costs(std::size_t apis) {
  static constexpr double kPrices[] = {0.01, 6.0, 10.0, 15.0};
  std::vector<double> costs;
  for (std::size_t k = 0; k < apis; ++k) {
    costs.push_back(k < 4 ? kPrices[k] : 15.0 + 5.0 * static_cast<double>(k - 3));
  }
  return CostTable(std::move(costs), 0);
}

std::string cost_table_json(const CostTable& costs, const std::vector<std::string>& api_names) {
  nlohmann::ordered_json j;
  j["apis"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < costs.size(); ++k) j["apis"][api_names.at(k)] = costs.cost(k);
  j["base"] = api_names.at(costs.base());
  j["price_unit"] = "per_query";
  return j.dump(2);
}

AccuracyMatrix synthetic_accuracies(std::size_t rows, std::size_t apis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.8);
  AccuracyMatrix out(rows, apis);
  for (std::size_t n = 0; n < rows; ++n) {
    const double difficulty = unit(rng);
    for (std::size_t k = 0; k < apis; ++k) {
      const double skill = -0.5 + 1.5 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(apis - 1, 1));
      const double logit = skill - 2.0 * difficulty + 1.0 + noise(rng);
      out(n, k) = 1.0 / (1.0 + std::exp(-logit));
    }
  }
  return out;
}

}  // namespace frugalmct
