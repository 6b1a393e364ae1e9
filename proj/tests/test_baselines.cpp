#include <random>

#include "doctest.h"
#include "frugalmct/baselines.hpp"
#include "frugalmct/combiner.hpp"

using namespace frugalmct;

namespace {

Record three_apis(ScoredLabelSet a, ScoredLabelSet b, ScoredLabelSet c, LabelSet truth = {}) {
  return {"r", {std::move(a), std::move(b), std::move(c)}, std::move(truth)};
}

}  // namespace

TEST_CASE("majority vote") {
  const auto r = three_apis({{"x", 0.1}, {"y", 0.9}}, {{"x", 0.2}}, {{"z", 1.0}});
  CHECK(majority_vote(r) == LabelSet{"x"});
  const Record two{"r", {{{"x", 0.3}}, {{"y", 0.3}}}, {}};
  CHECK(majority_vote(two) == LabelSet{"x", "y"});
}

TEST_CASE("majority vote stays inside the union of predictions") {
  std::mt19937 rng(1);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    Record r{"r", std::vector<ScoredLabelSet>(4), {}};
    LabelSet all;
    for (auto& p : r.predictions) {
      for (int i = 0; i < 6; ++i) {
        if (coin(rng)) {
          p.set("l" + std::to_string(i), 0.5);
          all.insert("l" + std::to_string(i));
        }
      }
    }
    for (const auto& l : majority_vote(r)) CHECK(all.contains(l));
  }
}

TEST_CASE("weighted vote") {
  const auto r = three_apis({{"x", 0.5}}, {}, {{"x", 0.6}});
  CHECK(weighted_majority_vote(r, {{1, 1, 1}, 1.0}) == LabelSet{"x"});
  CHECK(weighted_majority_vote(r, {{1, 1, 1}, 3.0}).empty());
  CHECK_THROWS_AS(weighted_majority_vote(r, {{1, 1}, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_majority_vote(r, {{1, -1, 1}, 0.5}), std::invalid_argument);

  const ScoredLabelSet s{{"a", 0.2}, {"b", 0.7}};
  const Record single{"r", {s}, {}};
  CHECK(weighted_majority_vote(single, {{1.0}, 0.5}) == apply_threshold(s, 0.5));
}

TEST_CASE("weighted vote is monotone in scores") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Record r{"r", std::vector<ScoredLabelSet>(3), {}};
    for (auto& p : r.predictions) p.set("a", unit(rng) * 0.5);
    const WeightedVoteParams params{{unit(rng), unit(rng), unit(rng)}, unit(rng)};
    const bool before = weighted_majority_vote(r, params).contains("a");
    r.predictions[trial % 3].set("a", r.predictions[trial % 3].score("a") + 0.5);
    if (before) CHECK(weighted_majority_vote(r, params).contains("a"));
  }
}

TEST_CASE("vote threshold tuning") {
  SUBCASE("unanimous and correct: every threshold below the weight sum ties") {
    const std::vector<Record> train{three_apis({{"a", 1}}, {{"a", 1}}, {{"a", 1}}, {"a"}),
                                    three_apis({{"b", 1}}, {{"b", 1}}, {{"b", 1}}, {"b"})};
    const std::vector<double> w{0.2, 0.3, 0.4};
    CHECK(tune_vote_threshold(train, w, 10) == 0.0);
  }
  SUBCASE("resolution 1 picks the better of 0 and 1") {
    // Scores sum to 1.5 for "a" (correct) and 0.4 for "z" (wrong): 0 keeps both, 1 keeps "a".
    const std::vector<Record> train{three_apis({{"a", 0.5}, {"z", 0.4}}, {{"a", 0.5}}, {{"a", 0.5}}, {"a"})};
    CHECK(tune_vote_threshold(train, std::vector<double>{1, 1, 1}, 1) == 1.0);
  }
  SUBCASE("a middle threshold wins") {
    const std::vector<Record> train{
        three_apis({{"a", 0.9}, {"z", 0.2}}, {{"a", 0.8}}, {}, {"a"}),
        three_apis({{"b", 0.3}}, {{"b", 0.4}, {"y", 0.3}}, {}, {"b"}),
        three_apis({{"c", 0.5}, {"x", 0.1}}, {}, {{"c", 0.6}}, {"c"}),
    };
    const std::vector<double> w{1, 1, 1};
    const int m = 20;
    // Exhaustive evaluation with the vote rebuilt by hand.
    double best_t = 0.0, best_v = -1.0;
    for (int i = 0; i <= m; ++i) {
      const double t = static_cast<double>(i) / m;
      double total = 0.0;
      for (const auto& r : train) {
        std::map<Label, double> score;
        for (const auto& p : r.predictions) {
          for (const auto& [l, s] : p) score[l] += s;
        }
        LabelSet pred;
        for (const auto& [l, s] : score) {
          if (s > t) pred.insert(l);
        }
        total += multilabel_accuracy(r.truth, pred);
      }
      if (total > best_v + 1e-12) {
        best_v = total;
        best_t = t;
      }
    }
    const double got = tune_vote_threshold(train, w, m);
    CHECK(got == doctest::Approx(best_t));
    CHECK(got > 0.0);
    CHECK(got < 1.0);
  }
  CHECK_THROWS_AS(tune_vote_threshold({}, std::vector<double>{1, 1}, 10), std::invalid_argument);
  const std::vector<Record> one{three_apis({}, {}, {})};
  CHECK_THROWS_AS(tune_vote_threshold(one, std::vector<double>{1, 1, 1}, 0), std::invalid_argument);
}

TEST_CASE("api accuracy weights") {
  const std::vector<Record> train{three_apis({{"a", 1}}, {{"b", 1}}, {{"a", 1}, {"b", 1}}, {"a"})};
  CHECK(api_accuracy_weights(train, &multilabel_accuracy) == std::vector<double>{1.0, 0.0, 0.5});
}

TEST_CASE("ensemble cost") {
  CHECK(ensemble_cost(CostTable({0.01, 6, 10, 15}, 0)) == 31.01);
}
