#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace frugalmct {

using Label = std::string;
using LabelSet = std::set<Label>;
using ApiIndex = std::size_t;

// Raised when a budget cannot cover the unconditional base call (or any other
// configuration that admits no feasible strategy).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Labels with quality scores in [0,1], as returned by one API for one input.
class ScoredLabelSet {
 public:
  using Map = std::map<Label, double>;

  ScoredLabelSet() = default;
  ScoredLabelSet(std::initializer_list<Map::value_type> entries);

  // Throws std::invalid_argument if score is outside [0,1] or not finite.
  void set(const Label& label, double score);

  // 0 when the label is absent.
  double score(const Label& label) const;
  bool contains(const Label& label) const { return entries_.contains(label); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }
  const Map& entries() const { return entries_; }

  LabelSet labels() const;

  friend bool operator==(const ScoredLabelSet&, const ScoredLabelSet&) = default;

 private:
  Map entries_;
};

// One data point: the recorded output of each of the K APIs plus ground truth.
struct Record {
  std::string id;
  std::vector<ScoredLabelSet> predictions;  // index = API id
  LabelSet truth;

  std::size_t num_apis() const { return predictions.size(); }
  friend bool operator==(const Record&, const Record&) = default;
};

// Per-query API prices plus the API that is always called first.
class CostTable {
 public:
  CostTable() = default;
  CostTable(std::vector<double> costs, ApiIndex base);

  std::size_t size() const { return costs_.size(); }
  ApiIndex base() const { return base_; }
  double cost(ApiIndex k) const { return costs_.at(k); }
  double base_cost() const { return costs_[base_]; }
  std::span<const double> costs() const { return costs_; }

  // Cost of calling k as the add-on; the base is already paid for.
  double hatted_cost(ApiIndex k) const { return k == base_ ? 0.0 : costs_.at(k); }
  // Budget left for add-on calls once the base call is paid.
  double hatted_budget(double budget) const { return budget - costs_[base_]; }
  double max_hatted_cost() const;
  double total_cost() const;

  // Same prices, different base.
  CostTable with_base(ApiIndex base) const { return CostTable(costs_, base); }

 private:
  std::vector<double> costs_;
  ApiIndex base_ = 0;
};

// Per-API accuracy estimates (or true accuracies) for a single input.
using AccuracyVector = std::vector<double>;

// Throws std::invalid_argument unless every entry is in [0,1].
void check_accuracy_vector(std::span<const double> values);

// Dense row-major matrix; rows are inputs, columns are APIs or features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(std::span<const std::vector<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t n, std::size_t k) const { return data_[n * cols_ + k]; }
  double& operator()(std::size_t n, std::size_t k) { return data_[n * cols_ + k]; }
  std::span<const double> row(std::size_t n) const {
    return {data_.data() + n * cols_, cols_};
  }
  std::span<double> row(std::size_t n) { return {data_.data() + n * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// N x K, entry (n, k) = accuracy of API k (combined with the base) on input n.
using AccuracyMatrix = Matrix;
using FeatureMatrix = Matrix;

// Label-set quality metrics. All take (truth, prediction).
using Metric = double (*)(const LabelSet& truth, const LabelSet& pred);

// |truth ∩ pred| / |truth ∪ pred|; 1 when both are empty.
double multilabel_accuracy(const LabelSet& truth, const LabelSet& pred);
// 2|truth ∩ pred| / (|truth| + |pred|); 1 when both are empty.
double f1_score(const LabelSet& truth, const LabelSet& pred);
// |truth ∩ pred| / |pred|; an empty prediction scores 1 only against empty truth.
double precision_score(const LabelSet& truth, const LabelSet& pred);

// "jaccard", "f1" or "precision".
Metric metric_from_name(std::string_view name);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

struct LabelSetPair {
  LabelSet truth;
  LabelSet pred;
};

// Per-label precision TP/(TP+FP) and recall TP/(TP+FN); zero denominators give 0.
std::map<Label, PrecisionRecall> precision_recall_per_label(std::span<const LabelSetPair> records);

// Mean per-query cost: base cost plus the average add-on cost of the assignments.
double strategy_cost(std::span<const ApiIndex> assignments, const CostTable& costs);

}  // namespace frugalmct
