#include "frugalmct/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace frugalmct {

namespace {

std::size_t intersection_size(const LabelSet& a, const LabelSet& b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

ScoredLabelSet::ScoredLabelSet(std::initializer_list<Map::value_type> entries) {
  for (const auto& [label, score] : entries) set(label, score);
}

void ScoredLabelSet::set(const Label& label, double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw std::invalid_argument("quality score for '" + label + "' outside [0,1]");
  }
  entries_[label] = score;
}

double ScoredLabelSet::score(const Label& label) const {
  auto it = entries_.find(label);
  return it == entries_.end() ? 0.0 : it->second;
}

LabelSet ScoredLabelSet::labels() const {
  LabelSet out;
  for (const auto& [label, score] : entries_) out.insert(out.end(), label);
  return out;
}

CostTable::CostTable(std::vector<double> costs, ApiIndex base)
    : costs_(std::move(costs)), base_(base) {
  if (costs_.empty()) throw std::invalid_argument("cost table is empty");
  if (base_ >= costs_.size()) throw std::out_of_range("base API index out of range");
  for (double c : costs_) {
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("API costs must be non-negative");
  }
}

double CostTable::max_hatted_cost() const {
  double best = 0.0;
  for (ApiIndex k = 0; k < costs_.size(); ++k) best = std::max(best, hatted_cost(k));
  return best;
}

double CostTable::total_cost() const {
  // Compensated (Neumaier) sum so that decimal price lists add up as written:
  // a plain left-to-right sum of 0.01, 6, 10, 15 lands one ulp below 31.01.
  double sum = 0.0;
  double carry = 0.0;
  for (double c : costs_) {
    const double t = sum + c;
    carry += std::abs(sum) >= std::abs(c) ? (sum - t) + c : (c - t) + sum;
    sum = t;
  }
  return sum + carry;
}

void check_accuracy_vector(std::span<const double> values) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("accuracy value outside [0,1]");
  }
}

Matrix Matrix::from_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return {};
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (rows[n].size() != out.cols_) throw std::invalid_argument("ragged matrix rows");
    std::copy(rows[n].begin(), rows[n].end(), out.row(n).begin());
  }
  return out;
}

double multilabel_accuracy(const LabelSet& truth, const LabelSet& pred) {
  if (truth.empty() && pred.empty()) return 1.0;
  const std::size_t common = intersection_size(truth, pred);
  const std::size_t uni = truth.size() + pred.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double f1_score(const LabelSet& truth, const LabelSet& pred) {
  if (truth.empty() && pred.empty()) return 1.0;
  const std::size_t common = intersection_size(truth, pred);
  return 2.0 * static_cast<double>(common) / static_cast<double>(truth.size() + pred.size());
}

double precision_score(const LabelSet& truth, const LabelSet& pred) {
  if (pred.empty()) return truth.empty() ? 1.0 : 0.0;
  return static_cast<double>(intersection_size(truth, pred)) / static_cast<double>(pred.size());
}

Metric metric_from_name(std::string_view name) {
  if (name == "jaccard") return &multilabel_accuracy;
  if (name == "f1") return &f1_score;
  if (name == "precision") return &precision_score;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

std::map<Label, PrecisionRecall> precision_recall_per_label(std::span<const LabelSetPair> records) {
  if (records.empty()) throw std::invalid_argument("precision/recall needs at least one record");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<Label, Counts> counts;
  for (const auto& r : records) {
    for (const auto& label : r.pred) {
      auto& c = counts[label];
      if (r.truth.contains(label)) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (const auto& label : r.truth) {
      if (!r.pred.contains(label)) ++counts[label].fn;
    }
  }
  std::map<Label, PrecisionRecall> out;
  for (const auto& [label, c] : counts) {
    PrecisionRecall pr;
    if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    out.emplace(label, pr);
  }
  return out;
}

double strategy_cost(std::span<const ApiIndex> assignments, const CostTable& costs) {
  if (assignments.empty()) throw std::invalid_argument("strategy_cost needs at least one assignment");
  double spend = 0.0;
  for (ApiIndex k : assignments) {
    if (k >= costs.size()) throw std::out_of_range("assignment names an unknown API");
    spend += costs.hatted_cost(k);
  }
  return costs.base_cost() + spend / static_cast<double>(assignments.size());
}

}  // namespace frugalmct
