#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "frugalmct/core.hpp"
#include "frugalmct/ingestion.hpp"
#include "json.hpp"

namespace frugalmct {

enum class FeatureScheme { one_hot_bounded, embedding_weighted };

struct FeatureVector {
  std::vector<double> values;
  FeatureScheme scheme = FeatureScheme::one_hot_bounded;
};

// Position i holds the base API's score for vocabulary[i] (0 when absent).
// Labels outside the vocabulary are ignored.
FeatureVector featurize_bounded(const ScoredLabelSet& base_set, std::span<const Label> vocabulary);

// Score-weighted sum of label embeddings; labels without an embedding are skipped.
FeatureVector featurize_unbounded(const ScoredLabelSet& base_set, const EmbeddingTable& embeddings);

// Reusable featurizer holding either a vocabulary index or an embedding table.
class Featurizer {
 public:
  static Featurizer bounded(std::vector<Label> vocabulary);
  static Featurizer unbounded(EmbeddingTable embeddings);

  FeatureScheme scheme() const { return scheme_; }
  std::size_t dimension() const;
  const std::vector<Label>& vocabulary() const { return vocabulary_; }

  std::vector<double> operator()(const ScoredLabelSet& base_set) const;
  // One row per record, built from the base API's output.
  FeatureMatrix featurize(std::span<const Record> records, ApiIndex base) const;

 private:
  FeatureScheme scheme_ = FeatureScheme::one_hot_bounded;
  std::vector<Label> vocabulary_;
  std::unordered_map<Label, std::size_t> index_;
  EmbeddingTable embeddings_;
};

struct ForestParams {
  int num_trees = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_samples_leaf = 5;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
};

// Multi-output CART regression tree stored as a flat node array.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;  // offset / output_dim into leaf_values
  };

  RegressionTree() = default;
  RegressionTree(std::vector<Node> nodes, std::vector<double> leaf_values, std::size_t output_dim)
      : nodes_(std::move(nodes)), leaf_values_(std::move(leaf_values)), output_dim_(output_dim) {}

  std::span<const double> predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t depth() const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j, std::size_t output_dim);

 private:
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;
  std::size_t output_dim_ = 0;
};

// Maps a feature vector to an estimated accuracy vector in [0,1]^K.
class AccuracyModel {
 public:
  enum class Kind { forest, dummy };

  static AccuracyModel forest(std::vector<RegressionTree> trees, std::size_t input_dim,
                              std::size_t output_dim, ForestParams params);
  static AccuracyModel dummy(AccuracyVector constant, std::size_t input_dim);

  Kind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const AccuracyVector& constant() const { return constant_; }
  const ForestParams& params() const { return params_; }

  // Writes the clamped prediction into `out` (size output_dim).
  void predict_into(std::span<const double> feature, std::span<double> out) const;

  nlohmann::json to_json() const;
  static AccuracyModel from_json(const nlohmann::json& j);

 private:
  Kind kind_ = Kind::dummy;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<RegressionTree> trees_;
  AccuracyVector constant_;
  ForestParams params_;
};

// Bootstrap-aggregated regression trees with per-split feature subsampling and
// variance-reduction splits. Deterministic under `seed`.
AccuracyModel fit_forest(const FeatureMatrix& features, const AccuracyMatrix& targets,
                         const ForestParams& params, std::uint64_t seed);
// Same, also filling `oob` (N x K) with each training row's out-of-bag prediction
// (trees whose bootstrap sample missed it); rows never left out get the full
// forest's prediction.
AccuracyModel fit_forest(const FeatureMatrix& features, const AccuracyMatrix& targets,
                         const ForestParams& params, std::uint64_t seed, AccuracyMatrix* oob);
AccuracyModel fit_forest(std::span<const FeatureVector> features,
                         std::span<const AccuracyVector> targets, const ForestParams& params,
                         std::uint64_t seed);

// Per-API mean of the training targets, ignoring features.
AccuracyModel fit_dummy(const AccuracyMatrix& targets, std::size_t input_dim = 0);
AccuracyModel fit_dummy(std::span<const AccuracyVector> targets);

AccuracyVector predict(const AccuracyModel& model, std::span<const double> feature);
AccuracyVector predict(const AccuracyModel& model, const FeatureVector& feature);
AccuracyMatrix predict_all(const AccuracyModel& model, const FeatureMatrix& features);

struct PredictorQuality {
  double rmse = 0.0;
  double pcc = 0.0;
};

// RMSE over all (n, k) pairs. PCC is the Pearson correlation per API averaged
// over APIs whose true accuracy varies; a constant prediction column counts as 0.
PredictorQuality compare_accuracies(const AccuracyMatrix& predicted, const AccuracyMatrix& truth);
PredictorQuality evaluate_predictor(const AccuracyModel& model, const FeatureMatrix& features,
                                    const AccuracyMatrix& truth);

}  // namespace frugalmct
