#include "frugalmct/selector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace frugalmct {

namespace {

constexpr double kExactSearchLimit = 1e6;
constexpr double kExhaustiveLimit = 2e7;
constexpr std::int64_t kDpCapacityLimit = 100000;
constexpr double kDpTableLimit = 5e7;

double total_spend(const SelectionInstance& instance, double p) {
  double spend = 0.0;
  for (std::size_t n = 0; n < instance.size(); ++n) {
    spend += instance.costs.hatted_cost(select_sp(instance.acc.row(n), p, instance.costs));
  }
  return spend;
}

std::vector<double> candidate_prices(const SelectionInstance& instance) {
  std::vector<double> prices{0.0};
  const auto& costs = instance.costs;
  for (std::size_t n = 0; n < instance.size(); ++n) {
    const auto row = instance.acc.row(n);
    for (ApiIndex k = 0; k < row.size(); ++k) {
      for (ApiIndex j = 0; j < row.size(); ++j) {
        const double dc = costs.hatted_cost(k) - costs.hatted_cost(j);
        const double da = row[k] - row[j];
        // Only an expensive-and-better option switches off as p grows.
        if (dc > 0.0 && da > 0.0) prices.push_back(da / dc);
      }
    }
  }
  std::sort(prices.begin(), prices.end());
  prices.erase(std::unique(prices.begin(), prices.end()), prices.end());
  return prices;
}

double min_positive_cost_gap(const CostTable& costs) {
  double gap = std::numeric_limits<double>::infinity();
  for (ApiIndex k = 0; k < costs.size(); ++k) {
    for (ApiIndex j = 0; j < costs.size(); ++j) {
      const double d = costs.hatted_cost(k) - costs.hatted_cost(j);
      if (d > 0.0) gap = std::min(gap, d);
    }
  }
  return gap;
}

void search_exhaustive(const SelectionInstance& inst, double cap, std::size_t n,
                       double cost_so_far, double acc_so_far, std::vector<ApiIndex>& current,
                       IlpSolution& best, double& best_total) {
  if (n == inst.size()) {
    if (acc_so_far > best_total + 1e-12) {
      best_total = acc_so_far;
      best.assignments = current;
    }
    return;
  }
  const auto row = inst.acc.row(n);
  for (ApiIndex k = 0; k < row.size(); ++k) {
    const double cost = cost_so_far + inst.costs.hatted_cost(k);
    if (cost > cap) continue;
    current[n] = k;
    search_exhaustive(inst, cap, n + 1, cost, acc_so_far + row[k], current, best, best_total);
  }
}

// Smallest power of ten (up to 1e4) that makes every add-on cost integral.
std::optional<std::int64_t> integer_cost_scale(const CostTable& costs) {
  for (std::int64_t scale = 1; scale <= 10000; scale *= 10) {
    bool ok = true;
    for (ApiIndex k = 0; k < costs.size() && ok; ++k) {
      const double scaled = costs.hatted_cost(k) * static_cast<double>(scale);
      ok = std::abs(scaled - std::round(scaled)) <= 1e-6 * std::max(1.0, scaled);
    }
    if (ok) return scale;
  }
  return std::nullopt;
}

}  // namespace

void SelectionInstance::validate() const {
  if (acc.rows() == 0) throw std::invalid_argument("selection instance has no inputs");
  if (acc.cols() != costs.size()) {
    throw std::invalid_argument("accuracy columns do not match the cost table");
  }
  check_accuracy_vector(acc.data());
  if (!std::isfinite(budget)) throw std::invalid_argument("budget must be finite");
  if (budget < costs.base_cost()) throw InfeasibleError("infeasible: budget below base cost");
}

ApiIndex select_sp(std::span<const double> acc_row, double p, const CostTable& costs) {
  if (acc_row.size() != costs.size()) throw std::invalid_argument("accuracy row has wrong size");
  double best = -std::numeric_limits<double>::infinity();
  for (ApiIndex k = 0; k < acc_row.size(); ++k) {
    best = std::max(best, acc_row[k] - p * costs.hatted_cost(k));
  }
  ApiIndex choice = costs.base();
  double choice_cost = std::numeric_limits<double>::infinity();
  for (ApiIndex k = 0; k < acc_row.size(); ++k) {
    const double c = costs.hatted_cost(k);
    if (acc_row[k] - p * c >= best - kSelectionEpsilon && c < choice_cost) {
      choice = k;
      choice_cost = c;
    }
  }
  return choice;
}

double spend_curve(const SelectionInstance& instance, double p) {
  if (instance.size() == 0) return 0.0;
  return total_spend(instance, p) / static_cast<double>(instance.size());
}

double solve_dual_price(const SelectionInstance& instance, double effective_budget) {
  if (!(effective_budget >= 0.0)) throw std::invalid_argument("effective budget is negative");
  if (instance.size() == 0) return 0.0;
  auto feasible = [&](double p) { return spend_curve(instance, p) <= effective_budget; };
  if (feasible(0.0)) return 0.0;

  const double n = static_cast<double>(instance.size());
  const double k = static_cast<double>(instance.num_apis());
  if (n * k * k <= kExactSearchLimit) {
    // spend_curve only changes at these prices and is non-increasing, so the
    // first feasible one is the answer.
    const auto prices = candidate_prices(instance);
    auto it = std::partition_point(prices.begin(), prices.end(),
                                   [&](double p) { return !feasible(p); });
    if (it == prices.end()) throw std::logic_error("no feasible dual price found");
    return *it;
  }

  double lo = 0.0;
  double hi = 1.0 / min_positive_cost_gap(instance.costs);
  while (!feasible(hi)) hi *= 2.0;
  while (hi - lo > 1e-9) {
    const double mid = lo + (hi - lo) / 2.0;
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

OfflineResult offline_strategy(const SelectionInstance& instance) {
  instance.validate();
  const std::size_t rows = instance.size();
  const std::size_t apis = instance.num_apis();
  const auto& costs = instance.costs;
  const double cap = static_cast<double>(rows) * instance.hatted_budget();

  OfflineResult out;
  out.lp.dual_price = solve_dual_price(instance, instance.hatted_budget());
  const double p = out.lp.dual_price;
  out.lp.z = Matrix(rows, apis);
  out.assignments.resize(rows);

  double spend = 0.0;
  for (std::size_t n = 0; n < rows; ++n) {
    const ApiIndex k = select_sp(instance.acc.row(n), p, costs);
    out.assignments[n] = k;
    out.lp.z(n, k) = 1.0;
    spend += costs.hatted_cost(k);
  }

  // Rows tied at p can move toward their most expensive tied option at a gain of
  // exactly p per unit cost. Filling the leftover budget with them recovers the
  // LP optimum; only the last row touched can end up fractional.
  if (p > 0.0) {
    struct Upgrade {
      std::size_t row;
      ApiIndex to;
      double gain;
      double extra_cost;
    };
    std::vector<Upgrade> upgrades;
    for (std::size_t n = 0; n < rows; ++n) {
      const auto row = instance.acc.row(n);
      double best = -std::numeric_limits<double>::infinity();
      for (ApiIndex k = 0; k < apis; ++k) best = std::max(best, row[k] - p * costs.hatted_cost(k));
      const ApiIndex from = out.assignments[n];
      ApiIndex to = from;
      for (ApiIndex k = 0; k < apis; ++k) {
        if (row[k] - p * costs.hatted_cost(k) >= best - kSelectionEpsilon &&
            costs.hatted_cost(k) > costs.hatted_cost(to)) {
          to = k;
        }
      }
      const double extra = costs.hatted_cost(to) - costs.hatted_cost(from);
      if (to != from && extra > 0.0 && row[to] > row[from]) {
        upgrades.push_back({n, to, row[to] - row[from], extra});
      }
    }
    std::stable_sort(upgrades.begin(), upgrades.end(), [](const Upgrade& a, const Upgrade& b) {
      return a.gain * b.extra_cost > b.gain * a.extra_cost;
    });
    double leftover = cap - spend;
    for (const auto& u : upgrades) {
      if (leftover <= 0.0) break;
      const ApiIndex from = out.assignments[u.row];
      if (u.extra_cost <= leftover) {
        out.assignments[u.row] = u.to;
        out.lp.z(u.row, from) = 0.0;
        out.lp.z(u.row, u.to) = 1.0;
        leftover -= u.extra_cost;
        continue;
      }
      const double fraction = leftover / u.extra_cost;
      out.lp.z(u.row, u.to) = fraction;
      out.lp.z(u.row, from) = 1.0 - fraction;
      out.lp.fractional_rows.push_back(u.row);
      out.assignments[u.row] = costs.base();
      break;
    }
  }

  double objective = 0.0;
  for (std::size_t n = 0; n < rows; ++n) {
    for (ApiIndex k = 0; k < apis; ++k) objective += out.lp.z(n, k) * instance.acc(n, k);
  }
  out.lp.objective = objective / static_cast<double>(rows);
  return out;
}

IlpSolution brute_force_ilp_exhaustive(const SelectionInstance& instance) {
  instance.validate();
  const double space =
      std::pow(static_cast<double>(instance.num_apis()), static_cast<double>(instance.size()));
  if (space > kExhaustiveLimit) throw std::invalid_argument("instance too large for exhaustive search");
  const double cap = static_cast<double>(instance.size()) * instance.hatted_budget() + kSelectionEpsilon;
  IlpSolution best;
  double best_total = -1.0;
  std::vector<ApiIndex> current(instance.size(), instance.costs.base());
  search_exhaustive(instance, cap, 0, 0.0, 0.0, current, best, best_total);
  best.objective = best_total / static_cast<double>(instance.size());
  return best;
}

IlpSolution brute_force_ilp_dp(const SelectionInstance& instance) {
  instance.validate();
  const auto& costs = instance.costs;
  const auto scale = integer_cost_scale(costs);
  if (!scale) throw std::invalid_argument("costs are not representable on a decimal grid");
  const std::size_t rows = instance.size();
  const std::size_t apis = instance.num_apis();

  std::vector<std::int64_t> unit(apis);
  std::int64_t max_unit = 0;
  for (ApiIndex k = 0; k < apis; ++k) {
    unit[k] = std::llround(costs.hatted_cost(k) * static_cast<double>(*scale));
    max_unit = std::max(max_unit, unit[k]);
  }
  const double raw_cap =
      std::floor(static_cast<double>(rows) * instance.hatted_budget() * static_cast<double>(*scale) + 1e-6);
  const double reachable = static_cast<double>(max_unit) * static_cast<double>(rows);
  const auto capacity = static_cast<std::int64_t>(std::min(raw_cap, reachable));
  if (capacity > kDpCapacityLimit) throw std::invalid_argument("cost grid too fine for the DP oracle");
  const auto width = static_cast<std::size_t>(capacity) + 1;
  if (static_cast<double>(rows) * static_cast<double>(width) > kDpTableLimit) {
    throw std::invalid_argument("instance too large for the DP oracle");
  }

  constexpr double kUnreachable = -1.0;
  std::vector<double> best(width, kUnreachable);
  std::vector<double> next(width);
  std::vector<std::uint16_t> choice(rows * width, 0);
  best[0] = 0.0;
  for (std::size_t n = 0; n < rows; ++n) {
    std::fill(next.begin(), next.end(), kUnreachable);
    const auto row = instance.acc.row(n);
    for (std::size_t c = 0; c < width; ++c) {
      if (best[c] < 0.0) continue;
      for (ApiIndex k = 0; k < apis; ++k) {
        const std::size_t target = c + static_cast<std::size_t>(unit[k]);
        if (target >= width) continue;
        const double value = best[c] + row[k];
        if (value > next[target] + 1e-12) {
          next[target] = value;
          choice[n * width + target] = static_cast<std::uint16_t>(k);
        }
      }
    }
    std::swap(best, next);
  }

  const auto end = std::max_element(best.begin(), best.end());
  IlpSolution out;
  out.objective = *end / static_cast<double>(rows);
  out.assignments.resize(rows);
  auto c = static_cast<std::size_t>(end - best.begin());
  for (std::size_t n = rows; n-- > 0;) {
    const ApiIndex k = choice[n * width + c];
    out.assignments[n] = k;
    c -= static_cast<std::size_t>(unit[k]);
  }
  return out;
}

IlpSolution brute_force_ilp(const SelectionInstance& instance) {
  const double space =
      std::pow(static_cast<double>(instance.num_apis()), static_cast<double>(instance.size()));
  if (space <= kExhaustiveLimit) return brute_force_ilp_exhaustive(instance);
  return brute_force_ilp_dp(instance);
}

double mean_accuracy(std::span<const ApiIndex> assignments, const AccuracyMatrix& acc) {
  if (assignments.size() != acc.rows()) throw std::invalid_argument("assignment count mismatch");
  if (assignments.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < assignments.size(); ++n) total += acc(n, assignments[n]);
  return total / static_cast<double>(assignments.size());
}

double estimate_p_hat(const SelectionInstance& train, double budget, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0,1)");
  const double effective = (1.0 - delta) * train.costs.hatted_budget(budget);
  if (effective < 0.0) throw InfeasibleError("infeasible: budget below base cost");
  return solve_dual_price(train, effective);
}

OnlineSelector::OnlineSelector(double p_hat, std::size_t stream_length, double budget,
                               CostTable costs)
    : p_hat_(p_hat), length_(stream_length), costs_(std::move(costs)) {
  if (!(p_hat >= 0.0)) throw std::invalid_argument("p_hat must be non-negative");
  const double per_query = costs_.hatted_budget(budget);
  if (per_query < 0.0) throw InfeasibleError("infeasible: budget below base cost");
  capacity_ = static_cast<double>(stream_length) * per_query;
}

ApiIndex OnlineSelector::step(std::span<const double> acc_row) {
  if (seen_ >= length_) throw std::invalid_argument("stream longer than declared length");
  ++seen_;
  const ApiIndex candidate = select_sp(acc_row, p_hat_, costs_);
  const double c = costs_.hatted_cost(candidate);
  // Tracking the spent total (rather than decrementing a residual) keeps the
  // recomputed sum of emitted costs bit-identical to what was checked here.
  if (spent_ + c <= capacity_) {
    spent_ += c;
    return candidate;
  }
  return costs_.base();
}

void OnlineSelector::finish() const {
  if (seen_ != length_) throw std::invalid_argument("stream shorter than declared length");
}

std::vector<ApiIndex> run_online(const AccuracyMatrix& stream, OnlinePolicy& policy,
                                 std::size_t stream_length, double budget,
                                 const CostTable& costs) {
  if (stream.rows() != stream_length) {
    throw std::invalid_argument("stream length does not match the declared N");
  }
  if (policy.base != costs.base()) throw std::invalid_argument("policy base differs from cost table");
  OnlineSelector selector(policy.p_hat, stream_length, budget, costs);
  policy.residual_budget = selector.residual_budget();
  std::vector<ApiIndex> out;
  out.reserve(stream_length);
  for (std::size_t n = 0; n < stream.rows(); ++n) {
    out.push_back(selector.step(stream.row(n)));
    policy.residual_budget = selector.residual_budget();
  }
  selector.finish();
  return out;
}

std::vector<int> default_delta_alphas() {
  std::vector<int> out(21);
  std::iota(out.begin(), out.end(), -10);
  return out;
}

DeltaTuning tune_delta(const SelectionInstance& train, const SelectionInstance& validation,
                       double budget, const AccuracyMatrix* validation_truth,
                       std::span<const int> alphas) {
  const std::size_t n = validation.size();
  if (n < 2) throw std::invalid_argument("delta tuning needs at least 2 validation inputs");
  if (validation_truth != nullptr &&
      (validation_truth->rows() != n || validation_truth->cols() != validation.num_apis())) {
    throw std::invalid_argument("validation truth has wrong shape");
  }
  const std::vector<int> defaults = default_delta_alphas();
  if (alphas.empty()) alphas = defaults;
  const AccuracyMatrix& truth = validation_truth != nullptr ? *validation_truth : validation.acc;
  const double scale = std::log(static_cast<double>(n)) / static_cast<double>(n);

  DeltaTuning out;
  for (int alpha : alphas) {
    DeltaCandidate cand;
    cand.alpha = alpha;
    cand.delta = std::clamp(alpha * scale, kMinDelta, kMaxDelta);
    cand.p_hat = estimate_p_hat(train, budget, cand.delta);
    OnlinePolicy policy{cand.p_hat, cand.delta, validation.costs.base(), 0.0};
    const auto chosen = run_online(validation.acc, policy, n, budget, validation.costs);
    cand.accuracy = mean_accuracy(chosen, truth);
    cand.cost = strategy_cost(chosen, validation.costs);
    cand.within_budget = cand.cost <= budget + kSelectionEpsilon;
    out.candidates.push_back(cand);
  }

  const DeltaCandidate* best = nullptr;
  for (const auto& cand : out.candidates) {
    if (!cand.within_budget) continue;
    if (best == nullptr || cand.accuracy > best->accuracy + 1e-12 ||
        (cand.accuracy >= best->accuracy - 1e-12 && cand.delta > best->delta)) {
      best = &cand;
    }
  }
  if (best == nullptr) throw InfeasibleError("no delta keeps the validation run within budget");
  out.delta = best->delta;
  out.p_hat = best->p_hat;
  return out;
}

}  // namespace frugalmct
