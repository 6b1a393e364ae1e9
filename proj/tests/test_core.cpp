#include <random>

#include "doctest.h"
#include "frugalmct/core.hpp"

using namespace frugalmct;

TEST_CASE("jaccard accuracy") {
  CHECK(multilabel_accuracy({"person", "car", "bike"}, {"person", "car"}) == doctest::Approx(2.0 / 3.0));
  CHECK(multilabel_accuracy({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(multilabel_accuracy({"a"}, {"b"}) == 0.0);
  CHECK(multilabel_accuracy({}, {}) == 1.0);
  CHECK(multilabel_accuracy({}, {"a"}) == 0.0);
  CHECK(multilabel_accuracy({"a"}, {}) == 0.0);
}

TEST_CASE("jaccard is symmetric and 1 only on equal sets") {
  std::mt19937 rng(3);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 500; ++trial) {
    LabelSet a, b;
    for (int i = 0; i < 6; ++i) {
      if (coin(rng)) a.insert("l" + std::to_string(i));
      if (coin(rng)) b.insert("l" + std::to_string(i));
    }
    CHECK(multilabel_accuracy(a, b) == multilabel_accuracy(b, a));
    CHECK((multilabel_accuracy(a, b) == 1.0) == (a == b));
  }
}

TEST_CASE("f1 and precision") {
  CHECK(f1_score({"a", "b"}, {"a"}) == doctest::Approx(2.0 / 3.0));
  CHECK(f1_score({}, {}) == 1.0);
  CHECK(precision_score({"a"}, {"a", "b"}) == 0.5);
  CHECK(precision_score({}, {}) == 1.0);
  CHECK(precision_score({"a"}, {}) == 0.0);
  CHECK(metric_from_name("jaccard") == &multilabel_accuracy);
  CHECK(metric_from_name("f1") == &f1_score);
  CHECK(metric_from_name("precision") == &precision_score);
  CHECK_THROWS_AS(metric_from_name("hamming"), std::invalid_argument);
}

TEST_CASE("scored label sets reject out-of-range scores") {
  ScoredLabelSet s{{"a", 0.5}};
  CHECK(s.score("a") == 0.5);
  CHECK(s.score("b") == 0.0);
  CHECK_THROWS_AS(s.set("b", 1.5), std::invalid_argument);
  CHECK_THROWS_AS(s.set("b", -0.1), std::invalid_argument);
  CHECK_THROWS_AS(s.set("b", std::nan("")), std::invalid_argument);
  CHECK(s.labels() == LabelSet{"a"});
}

TEST_CASE("per-label precision and recall") {
  SUBCASE("exact hit") {
    const std::vector<LabelSetPair> r{{{"a"}, {"a"}}};
    const auto pr = precision_recall_per_label(r);
    CHECK(pr.at("a").precision == 1.0);
    CHECK(pr.at("a").recall == 1.0);
  }
  SUBCASE("false positive label") {
    const std::vector<LabelSetPair> r{{{"a"}, {"a", "b"}}};
    const auto pr = precision_recall_per_label(r);
    CHECK(pr.at("a").precision == 1.0);
    CHECK(pr.at("b").precision == 0.0);
    CHECK(pr.at("b").recall == 0.0);
  }
  SUBCASE("missed once") {
    const std::vector<LabelSetPair> r{{{"a"}, {"a"}}, {{"a"}, {}}};
    const auto pr = precision_recall_per_label(r);
    CHECK(pr.at("a").precision == 1.0);
    CHECK(pr.at("a").recall == 0.5);
  }
  CHECK_THROWS_AS(precision_recall_per_label({}), std::invalid_argument);
}

TEST_CASE("cost table") {
  const CostTable c({0.5, 4.0, 10.0}, 0);
  CHECK(c.hatted_cost(0) == 0.0);
  CHECK(c.hatted_cost(1) == 4.0);
  CHECK(c.hatted_budget(3.0) == 2.5);
  CHECK(c.max_hatted_cost() == 10.0);
  CHECK(c.with_base(1).hatted_cost(0) == 0.5);
  CHECK(c.with_base(1).hatted_cost(1) == 0.0);
  CHECK_THROWS(CostTable({1.0, -1.0}, 0));
  CHECK_THROWS(CostTable({1.0, 2.0}, 2));
}

TEST_CASE("strategy cost") {
  CHECK(strategy_cost(std::vector<ApiIndex>{0, 0, 0}, CostTable({0.5, 3.0}, 0)) == 0.5);
  CHECK(strategy_cost(std::vector<ApiIndex>{0, 1}, CostTable({1.0, 4.0}, 0)) == 3.0);
  CHECK(strategy_cost(std::vector<ApiIndex>{1, 1, 0, 0}, CostTable({0.0, 10.0}, 0)) == 5.0);
  CHECK_THROWS_AS(strategy_cost(std::vector<ApiIndex>{2}, CostTable({0.0, 1.0}, 0)), std::out_of_range);
  CHECK_THROWS_AS(strategy_cost(std::vector<ApiIndex>{}, CostTable({0.0, 1.0}, 0)), std::invalid_argument);
}

TEST_CASE("strategy cost is monotone in add-on calls") {
  const CostTable c({0.2, 1.5, 3.0, 7.0}, 0);
  std::mt19937 rng(11);
  std::uniform_int_distribution<ApiIndex> api(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ApiIndex> a(9);
    for (auto& x : a) x = api(rng);
    const double before = strategy_cost(a, c);
    for (auto& x : a) {
      if (x != 0) continue;
      x = 1 + api(rng) % 3;
      CHECK(strategy_cost(a, c) >= before);
      break;
    }
  }
}

TEST_CASE("accuracy vectors stay in the unit interval") {
  CHECK_NOTHROW(check_accuracy_vector(std::vector<double>{0.0, 1.0, 0.5}));
  CHECK_THROWS(check_accuracy_vector(std::vector<double>{1.01}));
}
