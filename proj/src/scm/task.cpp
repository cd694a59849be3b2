// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/scm/task.hpp"

#include <algorithm>
#include <cmath>

namespace xpfn::scm {

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<double> binarize(std::span<const double> values, double q) {
  double t = quantile(values, q);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] > t ? 1.0 : 0.0;
  return out;
}

namespace {

bool both_classes(std::span<const double> labels) {
  bool has0 = std::find(labels.begin(), labels.end(), 0.0) != labels.end();
  bool has1 = std::find(labels.begin(), labels.end(), 1.0) != labels.end();
  return has0 && has1;
}

}  // namespace

ScmTask select_task(const DagSpec& dag, Matrix samples, Rng& rng, const TaskConfig& config) {
  std::size_t n_nodes = samples.cols();
  if (n_nodes < 2) throw InvalidArgument("select_task needs at least 2 nodes");
  if (config.m_max == 0) throw InvalidArgument("m_max must be at least 1");
  ScmTask task;
  task.dag = dag;
  task.target_node = uniform_index(rng, n_nodes);
  std::size_t m_hi = std::min(config.m_max, n_nodes - 1);
  std::size_t m = 1 + uniform_index(rng, m_hi);
  std::vector<std::size_t> pick = sample_without_replacement(rng, n_nodes - 1, m);
  for (std::size_t p : pick) task.feature_nodes.push_back(p >= task.target_node ? p + 1 : p);

  std::vector<double> target = samples.column(task.target_node);
  for (int attempt = 0; attempt < 2; ++attempt) {
    task.quantile = uniform(rng, config.quantile_lo, config.quantile_hi);
    task.labels = binarize(target, task.quantile);
    if (both_classes(task.labels)) {
      task.samples = std::move(samples);
      return task;
    }
  }
  throw TaskRejected("target node " + std::to_string(task.target_node) + " yields a single class");
}

double TrainingTriplet::max_efficiency_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    double total = base_value;
    for (double v : phi.row(i)) total += v;
    worst = std::max(worst, std::abs(total - y_hat[i]));
  }
  return worst;
}

TrainingTriplet make_triplet(const Matrix& x, const shap::PredictFn& predict, const shap::ShapConfig& shap) {
  TrainingTriplet t;
  t.x = x;
  t.y_hat = predict(x);
  shap::ShapResult res = shap::hybrid_shapley(predict, x, shap);
  t.phi = std::move(res.phi);
  t.base_value = res.base_value;
  t.provenance.estimator = res.estimator;
  t.provenance.shap_seed = shap.seed;
  t.provenance.n_permutations = res.estimator == "permutation" ? shap.n_permutations : 0;
  t.provenance.background_size = shap.background.rows();
  return t;
}

TrainingTriplet build_training_triplet(const ScmTask& task, const TripletConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix x = task.features();
  std::size_t n = x.rows();
  std::size_t m = x.cols();
  if (n < config.min_train_rows) throw TaskRejected("task has fewer rows than the base-model minimum");

  std::uint64_t base_seed = rng();
  std::uint64_t shap_seed = rng();
  bool exact = m <= config.exact_max_features && uniform(rng, 0.0, 1.0) < config.exact_fraction;

  std::size_t n_train = std::clamp(static_cast<std::size_t>(std::lround(config.train_fraction * static_cast<double>(n))),
                                   config.min_train_rows, n);
  std::vector<std::size_t> train_rows = sample_without_replacement(rng, n, n_train);
  std::sort(train_rows.begin(), train_rows.end());
  Matrix x_train = x.select_rows(train_rows);
  std::vector<double> y_train;
  for (std::size_t r : train_rows) y_train.push_back(task.labels[r]);
  if (!both_classes(y_train)) throw TaskRejected("training subset contains a single class");

  models::BaseModelConfig base_config = config.base;
  base_config.mlp.seed = base_seed;
  base_config.forest.seed = base_seed;
  models::BaseModel model;
  try {
    model = models::train_base_model(x_train, y_train, base_config);
  } catch (const models::TrainingDiverged& e) {
    throw TaskRejected(std::string("base model diverged: ") + e.what());
  }

  shap::ShapConfig shap;
  shap.mode = exact ? shap::ShapMode::kExact : shap::ShapMode::kPermutation;
  shap.exact_max_features = config.exact_max_features;
  shap.n_permutations = config.n_permutations;
  shap.seed = shap_seed;
  shap.threads = config.threads;
  std::vector<std::size_t> bg_rows = sample_without_replacement(rng, n, std::min(config.background_size, n));
  std::sort(bg_rows.begin(), bg_rows.end());
  shap.background = x.select_rows(bg_rows);

  TrainingTriplet t = make_triplet(x, [&model](const Matrix& q) { return model.predict(q); }, shap);
  t.provenance.base_kind = models::to_string(model.kind());
  t.provenance.task_seed = task.seed;
  t.provenance.base_seed = base_seed;
  return t;
}

ScmTask generate_task(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.min_samples < 8 || config.min_samples > config.max_samples) {
    throw InvalidArgument("sample range must satisfy 8 <= min <= max");
  }
  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
    std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, {attempt});
    Rng rng = make_rng(s);
    try {
      DagSpec dag = sample_dag(rng, config.dag);
      std::size_t n = config.min_samples + uniform_index(rng, config.max_samples - config.min_samples + 1);
      Matrix samples = propagate(dag, n, rng);
      ScmTask task = select_task(dag, std::move(samples), rng, config.task);
      task.seed = s;
      return task;
    } catch (const DegenerateTask&) {
    } catch (const TaskRejected&) {
    }
  }
  throw TaskRejected("no valid task after " + std::to_string(config.max_attempts) + " attempts");
}

TrainingTriplet generate_triplet(const GeneratorConfig& config, std::uint64_t seed) {
  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
    std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, {0x7269706c6574ULL, attempt});
    try {
      ScmTask task = generate_task(config, s);
      return build_training_triplet(task, config.triplet, derive_seed(task.seed, {1}));
    } catch (const TaskRejected&) {
    }
  }
  throw TaskRejected("no valid triplet after " + std::to_string(config.max_attempts) + " attempts");
}

}  // namespace xpfn::scm
