// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/models/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xpfn/common/error.hpp"
#include "xpfn/common/parallel.hpp"

namespace xpfn::models {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Matrix& y, const TreeConfig& config, Rng& rng)
      : x_(x), y_(y), config_(config), rng_(rng) {
    tree_.output_dim = y.cols();
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int add_leaf(const std::vector<std::size_t>& rows) {
    int id = static_cast<int>(tree_.feature.size());
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    std::size_t d = y_.cols();
    std::vector<double> sums(d, 0.0);
    for (std::size_t r : rows)
      for (std::size_t k = 0; k < d; ++k) sums[k] += y_(r, k);
    for (double s : sums) tree_.value.push_back(rows.empty() ? 0.0 : s / static_cast<double>(rows.size()));
    return id;
  }

  // Impurity of a node with given count and per-output sums / sums of squares,
  // scaled by count so that child impurities add.
  double weighted_impurity(double count, const std::vector<double>& sum, const std::vector<double>& sumsq) const {
    if (count == 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < sum.size(); ++k) {
      if (config_.criterion == SplitCriterion::kGini) {
        double p = sum[k] / count;
        total += count * 2.0 * p * (1.0 - p);
      } else {
        total += sumsq[k] - sum[k] * sum[k] / count;
      }
    }
    return total;
  }

  bool is_pure(const std::vector<std::size_t>& rows) const {
    for (std::size_t r : rows)
      for (std::size_t k = 0; k < y_.cols(); ++k)
        if (y_(r, k) != y_(rows.front(), k)) return false;
    return true;
  }

  Split best_split(const std::vector<std::size_t>& rows) {
    std::size_t m = x_.cols();
    std::size_t d = y_.cols();
    std::size_t n_candidates = config_.max_features == 0 ? m : std::min(config_.max_features, m);
    std::vector<std::size_t> features = sample_without_replacement(rng_, m, n_candidates);

    std::vector<double> total_sum(d, 0.0);
    std::vector<double> total_sq(d, 0.0);
    for (std::size_t r : rows) {
      for (std::size_t k = 0; k < d; ++k) {
        total_sum[k] += y_(r, k);
        total_sq[k] += y_(r, k) * y_(r, k);
      }
    }

    Split best;
    std::vector<std::size_t> order = rows;
    std::vector<double> left_sum(d);
    std::vector<double> left_sq(d);
    std::vector<double> right_sum(d);
    std::vector<double> right_sq(d);
    double n = static_cast<double>(rows.size());
    std::size_t min_leaf = std::max<std::size_t>(1, config_.min_samples_leaf);
    for (std::size_t f : features) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_sq.begin(), left_sq.end(), 0.0);
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        std::size_t r = order[i];
        for (std::size_t k = 0; k < d; ++k) {
          left_sum[k] += y_(r, k);
          left_sq[k] += y_(r, k) * y_(r, k);
        }
        double lo = x_(r, f);
        double hi = x_(order[i + 1], f);
        if (!(lo < hi)) continue;
        std::size_t n_left = i + 1;
        if (n_left < min_leaf || rows.size() - n_left < min_leaf) continue;
        for (std::size_t k = 0; k < d; ++k) {
          right_sum[k] = total_sum[k] - left_sum[k];
          right_sq[k] = total_sq[k] - left_sq[k];
        }
        double nl = static_cast<double>(n_left);
        double impurity = weighted_impurity(nl, left_sum, left_sq) + weighted_impurity(n - nl, right_sum, right_sq);
        if (impurity < best.impurity) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = Split{static_cast<int>(f), threshold, impurity, n_left};
        }
      }
    }
    double parent = weighted_impurity(n, total_sum, total_sq);
    if (best.feature >= 0 && !(best.impurity < parent - 1e-12 * std::max(1.0, std::abs(parent)))) best.feature = -1;
    return best;
  }

  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    if (depth >= config_.max_depth || rows.size() < std::max<std::size_t>(2, config_.min_samples_split) ||
        is_pure(rows)) {
      return add_leaf(rows);
    }
    Split split = best_split(rows);
    if (split.feature < 0) return add_leaf(rows);

    int id = add_leaf(rows);
    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) (x_(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    tree_.feature[id] = split.feature;
    tree_.threshold[id] = split.threshold;
    int l = grow(left_rows, depth + 1);
    int r = grow(right_rows, depth + 1);
    tree_.left[id] = l;
    tree_.right[id] = r;
    return id;
  }

  const Matrix& x_;
  const Matrix& y_;
  const TreeConfig& config_;
  Rng& rng_;
  DecisionTree tree_;
};

std::size_t candidates_per_split(MaxFeatures mode, std::size_t m) {
  if (mode == MaxFeatures::kAll) return m;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(m))));
}

ForestModel fit_forest(const Matrix& x, const Matrix& y, SplitCriterion criterion, const ForestConfig& config) {
  if (x.rows() == 0 || x.cols() == 0) throw InvalidArgument("forest training data is empty");
  if (y.rows() != x.rows()) throw InvalidArgument("forest targets do not match input rows");
  if (config.n_estimators == 0) throw InvalidArgument("forest needs at least one estimator");

  TreeConfig tree_config;
  tree_config.max_depth = config.max_depth;
  tree_config.min_samples_leaf = config.min_samples_leaf;
  tree_config.max_features = candidates_per_split(config.max_features, x.cols());
  tree_config.criterion = criterion;

  ForestModel model;
  model.input_dim = x.cols();
  model.output_dim = y.cols();
  model.criterion = criterion;
  model.trees.resize(config.n_estimators);
  for (std::size_t t = 0; t < config.n_estimators; ++t) model.tree_seeds.push_back(derive_seed(config.seed, {t}));

  parallel_for(config.n_estimators, config.threads, [&](std::size_t t) {
    Rng rng = make_rng(model.tree_seeds[t]);
    std::vector<std::size_t> rows(x.rows());
    if (config.bootstrap) {
      for (std::size_t& r : rows) r = uniform_index(rng, x.rows());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    model.trees[t] = fit_tree(x, y, rows, tree_config, rng);
  });
  return model;
}

void check_input(const ForestModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim) {
    throw InvalidArgument("forest expects " + std::to_string(model.input_dim) + " features, got " +
                          std::to_string(x.cols()));
  }
}

}  // namespace

std::span<const double> DecisionTree::leaf_value(std::span<const double> row) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    node = static_cast<std::size_t>(row[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node]
                                                                                                   : right[node]);
  }
  return {value.data() + node * output_dim, output_dim};
}

DecisionTree fit_tree(const Matrix& x, const Matrix& y, std::span<const std::size_t> rows, const TreeConfig& config,
                      Rng& rng) {
  if (rows.empty()) throw InvalidArgument("fit_tree needs at least one row");
  TreeBuilder builder(x, y, config, rng);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

ForestModel train_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config) {
  if (y.size() != x.rows()) throw InvalidArgument("train_forest: label count does not match row count");
  for (double v : y)
    if (v != 0.0 && v != 1.0) throw InvalidArgument("train_forest: labels must be 0 or 1");
  Matrix target(y.size(), 1, std::vector<double>(y.begin(), y.end()));
  return fit_forest(x, target, SplitCriterion::kGini, config);
}

ForestModel train_forest_regressor(const Matrix& x, const Matrix& y, const ForestConfig& config) {
  return fit_forest(x, y, SplitCriterion::kMse, config);
}

Matrix predict_outputs(const ForestModel& model, const Matrix& x) {
  check_input(model, x);
  if (model.trees.empty()) throw InvalidArgument("forest has no trees");
  Matrix out(x.rows(), model.output_dim);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::span<double> dst = out.row(r);
    for (const DecisionTree& tree : model.trees) {
      std::span<const double> leaf = tree.leaf_value(x.row(r));
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += leaf[k];
    }
    for (double& v : dst) v /= static_cast<double>(model.trees.size());
  }
  return out;
}

std::vector<double> predict_proba(const ForestModel& model, const Matrix& x) {
  return predict_outputs(model, x).column(0);
}

}  // namespace xpfn::models
