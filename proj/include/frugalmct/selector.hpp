#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "frugalmct/core.hpp"

namespace frugalmct {

// Absolute tolerance for comparing strategy values and budgets.
inline constexpr double kSelectionEpsilon = 1e-9;

// N inputs with estimated accuracies, the price list and a per-query budget.
struct SelectionInstance {
  AccuracyMatrix acc;
  CostTable costs;
  double budget = 0.0;

  std::size_t size() const { return acc.rows(); }
  std::size_t num_apis() const { return acc.cols(); }
  double hatted_budget() const { return costs.hatted_budget(budget); }
  // Throws std::invalid_argument on shape errors and InfeasibleError when the
  // budget cannot pay for the base API.
  void validate() const;
};

// Optimal vertex of the relaxed (fractional) selection problem.
struct LpSolution {
  Matrix z;  // N x K, rows sum to 1
  double objective = 0.0;
  double dual_price = 0.0;
  std::vector<std::size_t> fractional_rows;
};

struct OfflineResult {
  std::vector<ApiIndex> assignments;
  LpSolution lp;
};

struct IlpSolution {
  std::vector<ApiIndex> assignments;
  double objective = 0.0;
};

// argmax_k acc[k] - p * chat_k. Values within kSelectionEpsilon of the maximum
// tie; ties go to the cheapest add-on cost, then to the smallest index.
ApiIndex select_sp(std::span<const double> acc_row, double p, const CostTable& costs);

// Mean add-on spend (1/N) sum_n chat_{select_sp(row n, p)}. Non-increasing in p.
double spend_curve(const SelectionInstance& instance, double p);

// Smallest p >= 0 whose threshold strategy spends at most `effective_budget` per
// query on add-ons. Exact breakpoint search for N*K^2 <= 1e6, bisection to 1e-9
// beyond that.
double solve_dual_price(const SelectionInstance& instance, double effective_budget);

// Relaxed problem solved through its dual price, then rounded: integral rows keep
// their API, the (at most one) fractional row falls back to the base API.
OfflineResult offline_strategy(const SelectionInstance& instance);

// Exact integer optimum. Uses exhaustive search when K^N <= 2e7, otherwise a
// multiple-choice knapsack DP over integerized costs (up to 4 decimals, capacity
// <= 1e5). Throws std::invalid_argument if neither applies.
IlpSolution brute_force_ilp(const SelectionInstance& instance);
IlpSolution brute_force_ilp_exhaustive(const SelectionInstance& instance);
IlpSolution brute_force_ilp_dp(const SelectionInstance& instance);

// Mean of acc(n, assignments[n]).
double mean_accuracy(std::span<const ApiIndex> assignments, const AccuracyMatrix& acc);

// Dual price fitted on training data with the budget shrunk by (1 - delta).
double estimate_p_hat(const SelectionInstance& train, double budget, double delta);

struct OnlinePolicy {
  double p_hat = 0.0;
  double delta = 0.01;
  ApiIndex base = 0;
  double residual_budget = 0.0;  // add-on budget left for the rest of the stream
};

// Streaming selector: threshold strategy at p_hat, guarded by the residual
// add-on budget N * (b - c_base). O(K) per item.
class OnlineSelector {
 public:
  OnlineSelector(double p_hat, std::size_t stream_length, double budget, CostTable costs);

  ApiIndex step(std::span<const double> acc_row);

  std::size_t seen() const { return seen_; }
  std::size_t stream_length() const { return length_; }
  double spent() const { return spent_; }
  double capacity() const { return capacity_; }
  double residual_budget() const { return capacity_ - spent_; }
  // Throws std::invalid_argument unless exactly stream_length items were seen.
  void finish() const;

 private:
  double p_hat_;
  std::size_t length_;
  CostTable costs_;
  double capacity_;
  double spent_ = 0.0;
  std::size_t seen_ = 0;
};

// Runs the online selector over every row of `stream`, which must have exactly
// `stream_length` rows. Updates policy.residual_budget as it goes.
std::vector<ApiIndex> run_online(const AccuracyMatrix& stream, OnlinePolicy& policy,
                                 std::size_t stream_length, double budget,
                                 const CostTable& costs);

struct DeltaCandidate {
  int alpha = 0;
  double delta = 0.0;
  double p_hat = 0.0;
  double accuracy = 0.0;
  double cost = 0.0;
  bool within_budget = true;
};

struct DeltaTuning {
  double delta = 0.0;
  double p_hat = 0.0;
  std::vector<DeltaCandidate> candidates;
};

inline constexpr double kMinDelta = 1e-6;
inline constexpr double kMaxDelta = 0.99;

// Default multiplier grid {-10, ..., 10}.
std::vector<int> default_delta_alphas();

// Tries delta = clamp(alpha * log(N) / N, kMinDelta, kMaxDelta) for each alpha,
// replays the online selector on the validation set and keeps the most accurate
// run that stays within budget (ties go to the larger delta). Accuracy is read
// from `validation_truth` when given, else from the validation estimates.
DeltaTuning tune_delta(const SelectionInstance& train, const SelectionInstance& validation,
                       double budget, const AccuracyMatrix* validation_truth = nullptr,
                       std::span<const int> alphas = {});

}  // namespace frugalmct
