// Acceptance suite: one PASS/FAIL line per criterion. `acceptance --only N` runs
// a single criterion; the exit status is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frugalmct/baselines.hpp"
#include "frugalmct/combiner.hpp"
#include "frugalmct/predictor.hpp"
#include "frugalmct/selector.hpp"
#include "frugalmct/synthetic.hpp"

using namespace frugalmct;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Random instance with N in [4, 10], K in [2, 4], uniform accuracies, two-decimal
// costs in [0.01, 20] and a budget drawn between the base cost and the cost of the
// most expensive API.
SelectionInstance random_instance(std::mt19937_64& rng, int min_n = 4, int max_n = 10) {
  const auto n = std::uniform_int_distribution<std::size_t>(min_n, max_n)(rng);
  const auto k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cents(1, 2000);
  Matrix acc(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) acc(i, j) = unit(rng);
  }
  std::vector<double> costs(k);
  for (auto& c : costs) c = cents(rng) / 100.0;
  const CostTable table(costs, std::uniform_int_distribution<std::size_t>(0, k - 1)(rng));
  const double budget = table.base_cost() + unit(rng) * table.max_hatted_cost();
  return {acc, table, budget};
}

std::vector<SelectionInstance> gap_instances() {
  std::mt19937_64 rng(20240101);
  std::vector<SelectionInstance> out;
  for (int i = 0; i < 1000; ++i) out.push_back(random_instance(rng));
  return out;
}

const std::vector<SelectionInstance>& shared_instances() {
  static const auto instances = gap_instances();
  return instances;
}

const std::vector<IlpSolution>& shared_optima() {
  static const auto optima = [] {
    std::vector<IlpSolution> out;
    for (const auto& inst : shared_instances()) out.push_back(brute_force_ilp(inst));
    return out;
  }();
  return optima;
}

Outcome combiner_fixture() {
  const ScoredLabelSet base{{"person", 0.8}, {"car", 0.7}};
  const ScoredLabelSet addon{{"car", 0.5}, {"bike", 0.4}};
  const auto s = combine_scores(base, addon, 0.3);
  const auto set = apply_threshold(s, 0.25);
  const struct {
    const char* label;
    double expected;
  } want[] = {{"person", 0.24}, {"car", 0.46}, {"bike", 0.28}};
  bool ok = s.size() == 3 && set == LabelSet{"car", "bike"};
  std::string detail;
  for (const auto& w : want) {
    const double got = s.score(w.label);
    const bool hit = std::abs(got - w.expected) <= 1e-12;
    ok = ok && hit;
    detail += fmt("%s=%.12g%s ", w.label, got, hit ? "" : fmt(" (expected %.12g)", w.expected).c_str());
  }
  detail += set == LabelSet{"car", "bike"} ? "set={car,bike}" : "set mismatch";
  if (std::abs(s.score("car") - 0.46) > 1e-12) {
    detail += "; 0.3*0.7 + 0.7*0.5 = 0.56, so the expected car score contradicts the mixing rule";
  }
  return {ok, detail};
}

Outcome featurization_fixture() {
  const std::vector<Label> vocab{"person", "car", "bike"};
  const auto f = featurize_bounded({{"person", 0.8}, {"car", 0.7}}, vocab).values;
  const bool ok = f == std::vector<double>{0.8, 0.7, 0.0};
  return {ok, fmt("[%g, %g, %g]", f[0], f[1], f[2])};
}

Outcome rounding_gap() {
  const auto start = Clock::now();
  const auto& instances = shared_instances();
  const auto& optima = shared_optima();
  int bad = 0;
  double worst = -1e9;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto r = offline_strategy(inst);
    const double n = static_cast<double>(inst.size());
    const double gap = optima[i].objective - mean_accuracy(r.assignments, inst.acc);
    worst = std::max(worst, gap * n);
    const bool within = gap <= 1.0 / n + 1e-12;
    const bool affordable = strategy_cost(r.assignments, inst.costs) <= inst.budget + 1e-12;
    if (!within || !affordable) ++bad;
  }
  const double t = seconds_since(start);
  return {bad == 0 && t < 30.0,
          fmt("%zu instances, %d violations, worst gap %.3f/N, %.2fs", instances.size(), bad, worst, t)};
}

Outcome sparsity() {
  std::size_t worst = 0;
  for (const auto& inst : shared_instances()) {
    worst = std::max(worst, offline_strategy(inst).lp.fractional_rows.size());
  }
  return {worst <= 1, fmt("max fractional rows %zu over %zu instances", worst, shared_instances().size())};
}

Outcome dual_threshold() {
  const auto& instances = shared_instances();
  const auto& optima = shared_optima();
  int bad = 0;
  double worst = -1e9;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const double p_star = solve_dual_price(inst, inst.hatted_budget());
    OnlinePolicy policy{p_star, 0.0, inst.costs.base(), 0.0};
    const auto chosen = run_online(inst.acc, policy, inst.size(), inst.budget, inst.costs);
    const double n = static_cast<double>(inst.size());
    const double gap = optima[i].objective - mean_accuracy(chosen, inst.acc);
    worst = std::max(worst, gap * n);
    if (gap > 1.0 / n + 1e-12 || strategy_cost(chosen, inst.costs) > inst.budget + 1e-12) ++bad;
  }
  return {bad == 0, fmt("%d violations, worst gap %.3f/N", bad, worst)};
}

Outcome online_offline_gap() {
  const auto start = Clock::now();
  constexpr std::size_t kN = 5000;
  const CostTable costs = synthetic_costs(4);
  const double budgets[] = {3.0, 6.0, 10.0};
  double worst = 0.0;
  int overspent = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto train = synthetic_accuracies(kN, 4, 1000 + seed);
    const auto test = synthetic_accuracies(kN, 4, 2000 + seed);
    for (double b : budgets) {
      const double p_hat = estimate_p_hat({train, costs, b}, b, 0.01);
      OnlineSelector online(p_hat, kN, b, costs);
      std::vector<ApiIndex> chosen;
      for (std::size_t n = 0; n < kN; ++n) chosen.push_back(online.step(test.row(n)));
      online.finish();
      if (online.spent() > online.capacity()) ++overspent;
      const auto offline = offline_strategy({test, costs, b});
      worst = std::max(worst, std::abs(mean_accuracy(chosen, test) - mean_accuracy(offline.assignments, test)));
    }
  }
  const double t = seconds_since(start);
  return {worst <= 0.02 && overspent == 0 && t < 60.0,
          fmt("20 seeds x budgets {3,6,10}: max |online - offline| = %.4f, overspent runs %d, %.2fs", worst,
              overspent, t)};
}

Outcome adversarial_budget() {
  int bad = 0;
  int runs = 0;
  std::mt19937_64 rng(99);
  for (const CostTable& costs : {CostTable({0.0, 6.0, 10.0, 15.0}, 0), synthetic_costs(4)}) {
    for (double b : {1.0, 4.0, 7.5, 12.0}) {
      const auto acc = synthetic_accuracies(2000, 4, rng());
      for (double p : {0.0, 0.005, 0.02}) {
        // Deliberately under-priced, and the stream is sorted so the most expensive
        // picks come first.
        std::vector<std::size_t> order(acc.rows());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return costs.hatted_cost(select_sp(acc.row(x), p, costs)) >
                 costs.hatted_cost(select_sp(acc.row(y), p, costs));
        });
        // Prices and budgets are decimal with two places, so the audit runs in
        // integer cents where the comparison is exact.
        auto cents = [](double v) { return std::llround(v * 100.0); };
        OnlineSelector online(p, acc.rows(), b, costs);
        long long spent = 0;
        for (std::size_t n : order) spent += cents(costs.hatted_cost(online.step(acc.row(n))));
        online.finish();
        const long long limit = static_cast<long long>(acc.rows()) * (cents(b) - cents(costs.base_cost()));
        if (spent > limit || online.spent() > online.capacity()) ++bad;
        ++runs;
      }
    }
  }
  return {bad == 0, fmt("%d sorted streams, %d over N(b - c_base)", runs, bad)};
}

Outcome predictor_ordering() {
  const auto start = Clock::now();
  constexpr std::size_t kTrain = 2000, kTest = 1000, kDim = 6, kApis = 4;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  auto truth_of = [](const std::vector<double>& x, std::size_t k) {
    switch (k) {
      case 0: return 0.2 + 0.6 * x[0];
      case 1: return 0.5 + 0.3 * std::sin(6.0 * x[1]);
      case 2: return x[2] > 0.5 ? 0.85 : 0.25;
      default: return 0.3 + 0.4 * x[0] * x[3];
    }
  };
  auto draw = [&](std::size_t rows, FeatureMatrix& x, AccuracyMatrix& y) {
    x = FeatureMatrix(rows, kDim);
    y = AccuracyMatrix(rows, kApis);
    for (std::size_t n = 0; n < rows; ++n) {
      std::vector<double> f(kDim);
      for (auto& v : f) v = unit(rng);
      std::copy(f.begin(), f.end(), x.row(n).begin());
      for (std::size_t k = 0; k < kApis; ++k) y(n, k) = std::clamp(truth_of(f, k) + noise(rng), 0.0, 1.0);
    }
  };
  FeatureMatrix x_train, x_test;
  AccuracyMatrix y_train, y_test;
  draw(kTrain, x_train, y_train);
  draw(kTest, x_test, y_test);
  const auto forest = evaluate_predictor(fit_forest(x_train, y_train, {}, 1), x_test, y_test);
  const auto dummy = evaluate_predictor(fit_dummy(y_train, kDim), x_test, y_test);
  const double t = seconds_since(start);
  return {forest.rmse < dummy.rmse && forest.pcc > 0.3 && dummy.pcc == 0.0 && t < 30.0,
          fmt("forest rmse %.4f pcc %.3f; dummy rmse %.4f pcc %.3f; %.2fs", forest.rmse, forest.pcc, dummy.rmse,
              dummy.pcc, t)};
}

Outcome baseline_cost() {
  const double c = ensemble_cost(CostTable({0.01, 6.0, 10.0, 15.0}, 0));
  return {c == 31.01, fmt("%.15g (%s)", c, c == 31.01 ? "bit-exact" : "rounding error")};
}

Outcome online_throughput() {
  constexpr std::size_t kN = 1000000;
  const CostTable costs = synthetic_costs(4);
  const double b = 6.0;
  const double p_hat = estimate_p_hat({synthetic_accuracies(20000, 4, 5), costs, b}, b, 0.01);
  const auto stream = synthetic_accuracies(kN, 4, 6);
  const auto start = Clock::now();
  OnlineSelector online(p_hat, kN, b, costs);
  std::size_t paid = 0;
  for (std::size_t n = 0; n < kN; ++n) paid += online.step(stream.row(n)) != costs.base();
  online.finish();
  const double t = seconds_since(start);
  return {t < 5.0, fmt("10^6 items in %.3fs (%zu add-on calls)", t, paid)};
}

Outcome oracle_agreement() {
  const auto start = Clock::now();
  std::mt19937_64 rng(7);
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng, 4, 8);
    const auto a = brute_force_ilp_exhaustive(inst);
    const auto b = brute_force_ilp_dp(inst);
    const bool dp_feasible = strategy_cost(b.assignments, inst.costs) <= inst.budget + 1e-9;
    if (std::abs(a.objective - b.objective) > 1e-12 || !dp_feasible) ++bad;
  }
  const double t = seconds_since(start);
  return {bad == 0 && t < 10.0, fmt("200 instances, %d disagreements, %.2fs", bad, t)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) only = std::atoi(argv[2]);

  const std::vector<Criterion> criteria{
      {1, "combiner worked example", combiner_fixture},
      {2, "bounded featurization example", featurization_fixture},
      {3, "offline rounding gap <= 1/N and within budget", rounding_gap},
      {4, "at most one fractional LP row", sparsity},
      {5, "threshold strategy at p* within 1/N of the optimum", dual_threshold},
      {6, "online vs offline accuracy gap <= 0.02", online_offline_gap},
      {7, "online budget holds on adversarial streams", adversarial_budget},
      {8, "forest beats the dummy predictor", predictor_ordering},
      {9, "majority-vote cost is 31.01", baseline_cost},
      {10, "online selection of 10^6 items under 5s", online_throughput},
      {11, "exhaustive and DP oracles agree", oracle_agreement},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
