#include <random>

#include "doctest.h"
#include "frugalmct/base_search.hpp"
#include "frugalmct/synthetic.hpp"

using namespace frugalmct;

namespace {

TrainOptions options(double budget) {
  TrainOptions o;
  o.budget = budget;
  o.forest.num_trees = 20;
  o.combiner_grid = 5;
  o.seed = 3;
  return o;
}

// API 0 is the informative generator output; API 1 is replaced by random labels.
DatasetSplit noisy_fixture() {
  Dataset d = synthetic_dataset({300, 3, 6, 4}, 21);
  const auto vocab = build_vocabulary(d.records);
  std::mt19937 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (auto& r : d.records) {
    ScoredLabelSet noise;
    for (int i = 0; i < 3; ++i) noise.set(vocab[pick(rng)], score(rng));
    r.predictions[1] = noise;
  }
  return split(d, 0.5, 1);
}

}  // namespace

TEST_CASE("informative base wins") {
  const auto parts = noisy_fixture();
  const auto featurizer = make_featurizer(parts.train, std::nullopt);
  const std::vector<double> costs{0.0, 0.0, 10.0};
  const auto report = search_base(parts.train, parts.validation, costs, featurizer, options(5.0));
  CHECK(report.winner == 0);
  REQUIRE(report.candidates.size() == 3);
  CHECK(report.candidates[0].feasible);
  CHECK(report.candidates[1].feasible);
  CHECK_FALSE(report.candidates[2].feasible);
  CHECK(report.candidates[0].validation_accuracy > report.candidates[1].validation_accuracy);
  CHECK(report.winning().validation_cost <= 5.0 + 1e-12);

  const auto again = search_base(parts.train, parts.validation, costs, featurizer, options(5.0));
  CHECK(base_search_report_json(again, parts.train.api_names) ==
        base_search_report_json(report, parts.train.api_names));
  const auto j = base_search_report_json(report, parts.train.api_names);
  CHECK(j["winner"] == parts.train.api_names[0]);
}

TEST_CASE("candidate lists") {
  const auto parts = noisy_fixture();
  const auto featurizer = make_featurizer(parts.train, std::nullopt);
  const std::vector<double> costs{0.0, 0.0, 10.0};
  const std::vector<ApiIndex> only_one{1};
  CHECK(search_base(parts.train, parts.validation, costs, featurizer, options(5.0), only_one).winner == 1);

  const std::vector<ApiIndex> too_expensive{2};
  CHECK_THROWS_AS(search_base(parts.train, parts.validation, costs, featurizer, options(5.0), too_expensive),
                  InfeasibleError);
  const std::vector<ApiIndex> out_of_range{7};
  CHECK_THROWS_AS(search_base(parts.train, parts.validation, costs, featurizer, options(5.0), out_of_range),
                  std::out_of_range);
}
