#include "frugalmct/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

namespace frugalmct {

namespace {

constexpr int kModelFormat = 1;

// Split gain must exceed this (in summed squared error) to be taken.
constexpr double kMinGain = 1e-12;

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const AccuracyMatrix& y, const ForestParams& params,
              std::mt19937_64& rng)
      : x_(x), y_(y), params_(params), rng_(rng), out_dim_(y.cols()) {
    const std::size_t d = x.cols();
    mtry_ = params.features_per_split > 0
                ? std::min<std::size_t>(params.features_per_split, d)
                : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    mtry_ = std::max<std::size_t>(mtry_, 1);
    feature_order_.resize(d);
    std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
  }

  RegressionTree build(std::vector<std::size_t> sample) {
    nodes_.clear();
    leaf_values_.clear();
    struct Pending {
      int node;
      std::size_t begin, end;
      int depth;
    };
    sample_ = std::move(sample);
    nodes_.emplace_back();
    std::vector<Pending> stack{{0, 0, sample_.size(), 0}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      auto split = find_split(p.begin, p.end, p.depth);
      if (!split) {
        make_leaf(p.node, p.begin, p.end);
        continue;
      }
      // Partition the sample range by the chosen split.
      auto first = sample_.begin() + static_cast<std::ptrdiff_t>(p.begin);
      auto last = sample_.begin() + static_cast<std::ptrdiff_t>(p.end);
      auto mid = std::partition(first, last, [&](std::size_t i) {
        return x_(i, split->feature) <= split->threshold;
      });
      const auto mid_index = static_cast<std::size_t>(mid - sample_.begin());
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      const int right = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      auto& node = nodes_[p.node];
      node.feature = static_cast<int>(split->feature);
      node.threshold = split->threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, mid_index, p.end, p.depth + 1});
      stack.push_back({left, p.begin, mid_index, p.depth + 1});
    }
    return RegressionTree(std::move(nodes_), std::move(leaf_values_), out_dim_);
  }

 private:
  struct Split {
    std::size_t feature;
    double threshold;
  };

  void make_leaf(int node, std::size_t begin, std::size_t end) {
    const std::size_t offset = leaf_values_.size();
    leaf_values_.resize(offset + out_dim_, 0.0);
    for (std::size_t s = begin; s < end; ++s) {
      const auto row = y_.row(sample_[s]);
      for (std::size_t k = 0; k < out_dim_; ++k) leaf_values_[offset + k] += row[k];
    }
    const double count = static_cast<double>(end - begin);
    for (std::size_t k = 0; k < out_dim_; ++k) leaf_values_[offset + k] /= count;
    nodes_[node].feature = -1;
    nodes_[node].leaf = static_cast<int>(offset / out_dim_);
  }

  std::optional<Split> find_split(std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    const auto min_leaf = static_cast<std::size_t>(std::max(params_.min_samples_leaf, 1));
    if (params_.max_depth > 0 && depth >= params_.max_depth) return std::nullopt;
    if (n < 2 * min_leaf) return std::nullopt;

    std::vector<double> total(out_dim_, 0.0);
    for (std::size_t s = begin; s < end; ++s) {
      const auto row = y_.row(sample_[s]);
      for (std::size_t k = 0; k < out_dim_; ++k) total[k] += row[k];
    }
    double parent_score = 0.0;
    for (double t : total) parent_score += t * t / static_cast<double>(n);

    std::vector<std::size_t> order(sample_.begin() + static_cast<std::ptrdiff_t>(begin),
                                   sample_.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<double> left_sum(out_dim_);

    std::optional<Split> best;
    double best_score = parent_score + kMinGain;
    // Visit features in random order until mtry non-constant ones have been tried.
    std::size_t informative = 0;
    for (std::size_t i = 0; i < feature_order_.size() && informative < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, feature_order_.size() - 1);
      std::swap(feature_order_[i], feature_order_[pick(rng_)]);
      const std::size_t f = feature_order_[i];

      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_(a, f) < x_(b, f);
      });
      if (x_(order.front(), f) == x_(order.back(), f)) continue;
      ++informative;

      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      for (std::size_t pos = 0; pos + 1 < n; ++pos) {
        const auto row = y_.row(order[pos]);
        for (std::size_t k = 0; k < out_dim_; ++k) left_sum[k] += row[k];
        const std::size_t n_left = pos + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const double lo = x_(order[pos], f);
        const double hi = x_(order[pos + 1], f);
        if (lo == hi) continue;
        double score = 0.0;
        for (std::size_t k = 0; k < out_dim_; ++k) {
          const double r = total[k] - left_sum[k];
          score += left_sum[k] * left_sum[k] / static_cast<double>(n_left) +
                   r * r / static_cast<double>(n_right);
        }
        if (score > best_score) {
          best_score = score;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = Split{f, mid};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const AccuracyMatrix& y_;
  const ForestParams& params_;
  std::mt19937_64& rng_;
  std::size_t out_dim_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> feature_order_;
  std::vector<std::size_t> sample_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<double> leaf_values_;
};

void check_shapes(const FeatureMatrix& features, const AccuracyMatrix& targets) {
  if (features.rows() == 0) throw std::invalid_argument("no training data");
  if (features.rows() != targets.rows()) {
    throw std::invalid_argument("feature and target counts differ");
  }
  if (targets.cols() == 0) throw std::invalid_argument("targets have no columns");
}

}  // namespace

FeatureVector featurize_bounded(const ScoredLabelSet& base_set, std::span<const Label> vocabulary) {
  if (vocabulary.empty()) throw std::invalid_argument("vocabulary is empty");
  FeatureVector out{std::vector<double>(vocabulary.size(), 0.0), FeatureScheme::one_hot_bounded};
  for (std::size_t i = 0; i < vocabulary.size(); ++i) out.values[i] = base_set.score(vocabulary[i]);
  return out;
}

FeatureVector featurize_unbounded(const ScoredLabelSet& base_set, const EmbeddingTable& embeddings) {
  if (embeddings.vectors.empty() || embeddings.dimension == 0) {
    throw std::invalid_argument("embedding table is empty");
  }
  FeatureVector out{std::vector<double>(embeddings.dimension, 0.0),
                    FeatureScheme::embedding_weighted};
  for (const auto& [label, score] : base_set) {
    const auto* vec = embeddings.find(label);
    if (vec == nullptr) continue;
    for (std::size_t i = 0; i < embeddings.dimension; ++i) out.values[i] += score * (*vec)[i];
  }
  return out;
}

Featurizer Featurizer::bounded(std::vector<Label> vocabulary) {
  if (vocabulary.empty()) throw std::invalid_argument("vocabulary is empty");
  Featurizer f;
  f.scheme_ = FeatureScheme::one_hot_bounded;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) f.index_.emplace(vocabulary[i], i);
  f.vocabulary_ = std::move(vocabulary);
  return f;
}

Featurizer Featurizer::unbounded(EmbeddingTable embeddings) {
  if (embeddings.vectors.empty()) throw std::invalid_argument("embedding table is empty");
  Featurizer f;
  f.scheme_ = FeatureScheme::embedding_weighted;
  f.embeddings_ = std::move(embeddings);
  return f;
}

std::size_t Featurizer::dimension() const {
  return scheme_ == FeatureScheme::one_hot_bounded ? vocabulary_.size() : embeddings_.dimension;
}

std::vector<double> Featurizer::operator()(const ScoredLabelSet& base_set) const {
  if (scheme_ == FeatureScheme::embedding_weighted) {
    return featurize_unbounded(base_set, embeddings_).values;
  }
  std::vector<double> out(vocabulary_.size(), 0.0);
  for (const auto& [label, score] : base_set) {
    auto it = index_.find(label);
    if (it != index_.end()) out[it->second] = score;
  }
  return out;
}

FeatureMatrix Featurizer::featurize(std::span<const Record> records, ApiIndex base) const {
  FeatureMatrix out(records.size(), dimension());
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto values = (*this)(records[n].predictions.at(base));
    std::copy(values.begin(), values.end(), out.row(n).begin());
  }
  return out;
}

std::span<const double> RegressionTree::predict(std::span<const double> x) const {
  int index = 0;
  while (nodes_[index].feature >= 0) {
    const auto& node = nodes_[index];
    index = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return {leaf_values_.data() + static_cast<std::size_t>(nodes_[index].leaf) * output_dim_,
          output_dim_};
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [index, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = nodes_[index];
    if (node.feature >= 0) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

nlohmann::json RegressionTree::to_json() const {
  // Nested split/leaf objects, built bottom-up to avoid recursion.
  std::vector<nlohmann::json> built(nodes_.size());
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const auto& node = nodes_[i];
    if (node.feature < 0) {
      const auto* v = leaf_values_.data() + static_cast<std::size_t>(node.leaf) * output_dim_;
      built[i] = {{"value", std::vector<double>(v, v + output_dim_)}};
    } else {
      built[i] = {{"feature", node.feature},
                  {"threshold", node.threshold},
                  {"left", std::move(built[node.left])},
                  {"right", std::move(built[node.right])}};
    }
  }
  return std::move(built[0]);
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j, std::size_t output_dim) {
  std::vector<Node> nodes;
  std::vector<double> leaves;
  std::vector<std::pair<const nlohmann::json*, int>> stack{{&j, 0}};
  nodes.emplace_back();
  while (!stack.empty()) {
    auto [obj, index] = stack.back();
    stack.pop_back();
    if (obj->contains("value")) {
      auto value = obj->at("value").get<std::vector<double>>();
      if (value.size() != output_dim) throw FormatError("leaf value has wrong dimension");
      nodes[index].leaf = static_cast<int>(leaves.size() / output_dim);
      leaves.insert(leaves.end(), value.begin(), value.end());
      continue;
    }
    const int left = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const int right = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[index].feature = obj->at("feature").get<int>();
    nodes[index].threshold = obj->at("threshold").get<double>();
    nodes[index].left = left;
    nodes[index].right = right;
    stack.emplace_back(&obj->at("right"), right);
    stack.emplace_back(&obj->at("left"), left);
  }
  return RegressionTree(std::move(nodes), std::move(leaves), output_dim);
}

AccuracyModel AccuracyModel::forest(std::vector<RegressionTree> trees, std::size_t input_dim,
                                    std::size_t output_dim, ForestParams params) {
  if (trees.empty()) throw std::invalid_argument("forest needs at least one tree");
  AccuracyModel m;
  m.kind_ = Kind::forest;
  m.trees_ = std::move(trees);
  m.input_dim_ = input_dim;
  m.output_dim_ = output_dim;
  m.params_ = params;
  return m;
}

AccuracyModel AccuracyModel::dummy(AccuracyVector constant, std::size_t input_dim) {
  AccuracyModel m;
  m.kind_ = Kind::dummy;
  m.output_dim_ = constant.size();
  m.input_dim_ = input_dim;
  m.constant_ = std::move(constant);
  return m;
}

void AccuracyModel::predict_into(std::span<const double> feature, std::span<double> out) const {
  if (kind_ == Kind::forest && feature.size() != input_dim_) {
    throw std::invalid_argument("feature dimension does not match the model");
  }
  if (out.size() != output_dim_) throw std::invalid_argument("output buffer has wrong size");
  if (kind_ == Kind::dummy) {
    std::copy(constant_.begin(), constant_.end(), out.begin());
  } else {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& tree : trees_) {
      const auto leaf = tree.predict(feature);
      for (std::size_t k = 0; k < output_dim_; ++k) out[k] += leaf[k];
    }
    for (auto& v : out) v /= static_cast<double>(trees_.size());
  }
  for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
}

nlohmann::json AccuracyModel::to_json() const {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["input_dim"] = input_dim_;
  j["output_dim"] = output_dim_;
  if (kind_ == Kind::dummy) {
    j["kind"] = "dummy";
    j["constant"] = constant_;
    return j;
  }
  j["kind"] = "forest";
  j["hyperparams"] = {{"num_trees", params_.num_trees},
                      {"max_depth", params_.max_depth},
                      {"min_samples_leaf", params_.min_samples_leaf},
                      {"features_per_split", params_.features_per_split}};
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& tree : trees_) trees.push_back(tree.to_json());
  return j;
}

AccuracyModel AccuracyModel::from_json(const nlohmann::json& j) {
  if (j.value("format", 0) != kModelFormat) throw FormatError("unsupported model format");
  const auto kind = j.at("kind").get<std::string>();
  const auto input_dim = j.at("input_dim").get<std::size_t>();
  const auto output_dim = j.at("output_dim").get<std::size_t>();
  if (kind == "dummy") {
    auto constant = j.at("constant").get<AccuracyVector>();
    if (constant.size() != output_dim) throw FormatError("dummy constant has wrong dimension");
    return dummy(std::move(constant), input_dim);
  }
  if (kind != "forest") throw FormatError("unknown model kind '" + kind + "'");
  ForestParams params;
  const auto& hp = j.at("hyperparams");
  params.num_trees = hp.at("num_trees").get<int>();
  params.max_depth = hp.at("max_depth").get<int>();
  params.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
  params.features_per_split = hp.at("features_per_split").get<int>();
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(RegressionTree::from_json(t, output_dim));
  return forest(std::move(trees), input_dim, output_dim, params);
}

AccuracyModel fit_forest(const FeatureMatrix& features, const AccuracyMatrix& targets,
                         const ForestParams& params, std::uint64_t seed, AccuracyMatrix* oob) {
  check_shapes(features, targets);
  if (params.num_trees < 1) throw std::invalid_argument("forest needs at least one tree");
  const std::size_t n = features.rows();
  const std::size_t k = targets.cols();
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.num_trees));
  std::vector<std::size_t> oob_count;
  if (oob != nullptr) {
    *oob = AccuracyMatrix(n, k);
    oob_count.assign(n, 0);
  }
  std::vector<char> in_bag(n);
  for (int t = 0; t < params.num_trees; ++t) {
    // Per-tree stream so trees are independent of training order.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> sample(n);
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto& s : sample) {
      s = draw(rng);
      in_bag[s] = 1;
    }
    TreeBuilder builder(features, targets, params, rng);
    trees.push_back(builder.build(std::move(sample)));
    if (oob == nullptr) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      const auto leaf = trees.back().predict(features.row(i));
      for (std::size_t j = 0; j < k; ++j) (*oob)(i, j) += leaf[j];
      ++oob_count[i];
    }
  }
  auto model = AccuracyModel::forest(std::move(trees), features.cols(), targets.cols(), params);
  if (oob != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = oob->row(i);
      if (oob_count[i] == 0) {
        model.predict_into(features.row(i), row);
        continue;
      }
      for (auto& v : row) v = std::clamp(v / static_cast<double>(oob_count[i]), 0.0, 1.0);
    }
  }
  return model;
}

AccuracyModel fit_forest(const FeatureMatrix& features, const AccuracyMatrix& targets,
                         const ForestParams& params, std::uint64_t seed) {
  return fit_forest(features, targets, params, seed, nullptr);
}

AccuracyModel fit_forest(std::span<const FeatureVector> features,
                         std::span<const AccuracyVector> targets, const ForestParams& params,
                         std::uint64_t seed) {
  std::vector<std::vector<double>> rows;
  rows.reserve(features.size());
  for (const auto& f : features) rows.push_back(f.values);
  return fit_forest(Matrix::from_rows(rows), Matrix::from_rows(targets), params, seed);
}

AccuracyModel fit_dummy(const AccuracyMatrix& targets, std::size_t input_dim) {
  if (targets.rows() == 0) throw std::invalid_argument("no training targets");
  AccuracyVector mean(targets.cols(), 0.0);
  for (std::size_t n = 0; n < targets.rows(); ++n) {
    for (std::size_t k = 0; k < targets.cols(); ++k) mean[k] += targets(n, k);
  }
  for (auto& v : mean) v /= static_cast<double>(targets.rows());
  return AccuracyModel::dummy(std::move(mean), input_dim);
}

AccuracyModel fit_dummy(std::span<const AccuracyVector> targets) {
  return fit_dummy(Matrix::from_rows(targets));
}

AccuracyVector predict(const AccuracyModel& model, std::span<const double> feature) {
  AccuracyVector out(model.output_dim());
  model.predict_into(feature, out);
  return out;
}

AccuracyVector predict(const AccuracyModel& model, const FeatureVector& feature) {
  return predict(model, std::span<const double>(feature.values));
}

AccuracyMatrix predict_all(const AccuracyModel& model, const FeatureMatrix& features) {
  AccuracyMatrix out(features.rows(), model.output_dim());
  for (std::size_t n = 0; n < features.rows(); ++n) model.predict_into(features.row(n), out.row(n));
  return out;
}

PredictorQuality compare_accuracies(const AccuracyMatrix& predicted, const AccuracyMatrix& truth) {
  if (truth.rows() == 0) throw std::invalid_argument("empty evaluation set");
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw std::invalid_argument("prediction and truth shapes differ");
  }
  const std::size_t rows = truth.rows();
  const auto count = static_cast<double>(rows);
  double sq = 0.0;
  double pcc_sum = 0.0;
  std::size_t pcc_terms = 0;
  for (std::size_t k = 0; k < truth.cols(); ++k) {
    double mean_p = 0.0, mean_t = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
      const double d = predicted(n, k) - truth(n, k);
      sq += d * d;
      mean_p += predicted(n, k);
      mean_t += truth(n, k);
    }
    mean_p /= count;
    mean_t /= count;
    double cov = 0.0, var_p = 0.0, var_t = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
      const double dp = predicted(n, k) - mean_p;
      const double dt = truth(n, k) - mean_t;
      cov += dp * dt;
      var_p += dp * dp;
      var_t += dt * dt;
    }
    // Relative cutoff so a constant column reads as zero variance despite rounding.
    const double eps = 1e-24 * count;
    if (var_t <= eps) continue;  // nothing to correlate against
    ++pcc_terms;
    if (var_p > eps) pcc_sum += cov / std::sqrt(var_p * var_t);
  }
  PredictorQuality q;
  q.rmse = std::sqrt(sq / (count * static_cast<double>(truth.cols())));
  q.pcc = pcc_terms == 0 ? 0.0 : pcc_sum / static_cast<double>(pcc_terms);
  return q;
}

PredictorQuality evaluate_predictor(const AccuracyModel& model, const FeatureMatrix& features,
                                    const AccuracyMatrix& truth) {
  return compare_accuracies(predict_all(model, features), truth);
}

}  // namespace frugalmct
