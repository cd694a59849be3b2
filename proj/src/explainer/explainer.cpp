// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/explainer/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "xpfn/autodiff/adam.hpp"
#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/error.hpp"
#include "xpfn/common/parallel.hpp"

namespace xpfn::explainer {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::string_view kMagic = "XPFNEXPL";

std::string layer_key(std::size_t l, const std::string& name) { return "l" + std::to_string(l) + "." + name; }
std::string head_key(std::size_t l, std::size_t h, const std::string& name) {
  return layer_key(l, "h" + std::to_string(h) + "." + name);
}

ad::Tensor glorot(std::size_t in, std::size_t out, Rng& rng) {
  ad::Tensor t(ad::Shape{in, out});
  double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& v : t.values()) v = uniform(rng, -limit, limit);
  return t;
}

ad::NodeId affine_norm(ad::Graph& g, ad::NodeId x, const std::string& prefix) {
  return g.add(g.multiply(g.layer_norm(x), g.input(prefix + ".g")), g.input(prefix + ".b"));
}

ad::Tensor to_tensor(const Matrix& m) { return ad::Tensor::matrix(m.rows(), m.cols(), m.storage()); }

double cosine_lr(double peak, std::size_t step, std::size_t total) {
  if (total == 0) return peak;
  const double pi = std::acos(-1.0);
  return peak * 0.5 * (1.0 + std::cos(pi * static_cast<double>(step) / static_cast<double>(total)));
}

double window_mean(const std::vector<double>& v, bool tail, std::size_t window) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t w = std::min(std::max<std::size_t>(window, 1), v.size());
  auto begin = tail ? v.end() - static_cast<std::ptrdiff_t>(w) : v.begin();
  return std::accumulate(begin, begin + static_cast<std::ptrdiff_t>(w), 0.0) / static_cast<double>(w);
}

void check_features(const ExplainerConfig& config, std::size_t m) {
  if (m == 0) throw InvalidArgument("explainer needs at least one feature");
  if (m > config.max_features) {
    throw InvalidArgument("data has " + std::to_string(m) + " features but the explainer supports at most " +
                          std::to_string(config.max_features));
  }
}

// Loss and gradients averaged over every feature pass of one task.
struct StepResult {
  double loss = 0.0;
  ad::TensorMap grads;
};

StepResult task_gradients(const ExplainerWeights& w, const TrainingTask& task) {
  const ExplainerConfig& c = w.config;
  std::size_t m = task.x.cols();
  check_features(c, m);
  Matrix targets = standardize_targets(task.phi);
  InputStats stats = fit_input_stats(task.x, task.y_hat);
  StepResult out;
  for (std::size_t j = 0; j < m; ++j) {
    ad::Graph g;
    ad::NodeId slots = g.input("slots");
    std::vector<double> tj = targets.column(j);
    ad::NodeId loss = build_loss(g, c, slots, m, tj);
    ad::TensorMap feed = w.params;
    feed["slots"] = to_tensor(slot_matrix(task.x, task.y_hat, j, c.max_features, &stats));
    out.loss += g.forward(feed, loss).item() / static_cast<double>(m);
    ad::TensorMap grads = g.backward(loss);
    for (auto& [name, grad] : grads) {
      if (name == "slots") continue;
      auto it = out.grads.find(name);
      if (it == out.grads.end()) it = out.grads.emplace(name, ad::Tensor(grad.shape())).first;
      for (std::size_t i = 0; i < grad.size(); ++i) it->second[i] += grad[i] / static_cast<double>(m);
    }
  }
  return out;
}

TrainingTask subsample(const TrainingTask& t, std::size_t max_rows, Rng& rng) {
  if (t.x.rows() <= max_rows) return t;
  std::vector<std::size_t> rows = sample_without_replacement(rng, t.x.rows(), max_rows);
  std::sort(rows.begin(), rows.end());
  TrainingTask out;
  out.x = t.x.select_rows(rows);
  out.phi = t.phi.select_rows(rows);
  for (std::size_t r : rows) out.y_hat.push_back(t.y_hat[r]);
  return out;
}

void clip_gradients(ad::TensorMap& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.values()) sq += v * v;
  double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  double factor = max_norm / norm;
  for (auto& [name, g] : grads)
    for (double& v : g.values()) v *= factor;
}

}  // namespace

std::vector<double> default_bucket_edges(std::size_t k, double inner, double outer) {
  if (k < 3) throw InvalidArgument("default bucket layout needs K >= 3");
  if (!(0.0 < inner && inner < outer)) throw InvalidArgument("bucket range needs 0 < inner < outer");
  std::vector<double> edges{-outer};
  std::size_t interior = k - 2;
  for (std::size_t i = 0; i <= interior; ++i) {
    edges.push_back(-inner + 2.0 * inner * static_cast<double>(i) / static_cast<double>(interior));
  }
  edges.push_back(outer);
  return edges;
}

std::vector<double> bucket_centers(std::span<const double> edges) {
  std::vector<double> centers;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) centers.push_back(0.5 * (edges[k] + edges[k + 1]));
  return centers;
}

std::size_t bucket_index(std::span<const double> edges, double value) {
  std::size_t k = edges.size() - 1;
  // First edge strictly greater than value; its predecessor opens the bucket.
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  if (it == edges.begin()) return 0;
  std::size_t idx = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(idx, k - 1);
}

void ExplainerConfig::validate() const {
  if (bucket_edges.size() < 3) throw InvalidArgument("explainer needs at least 2 buckets");
  for (std::size_t i = 1; i < bucket_edges.size(); ++i) {
    if (!(bucket_edges[i] > bucket_edges[i - 1])) throw InvalidArgument("bucket edges must be strictly increasing");
  }
  if (embed_dim == 0 || n_heads == 0 || embed_dim % n_heads != 0) {
    throw InvalidArgument("embed_dim must be a positive multiple of n_heads");
  }
  if (ffn_dim == 0 || max_features == 0 || max_context_rows == 0) throw InvalidArgument("explainer sizes must be positive");
  if (!(lr_min > 0.0 && lr_min <= lr_max)) throw InvalidArgument("learning-rate range must satisfy 0 < lr_min <= lr_max");
  if (restarts == 0) throw InvalidArgument("restarts must be at least 1");
  if (max_train_rows < 2) throw InvalidArgument("max_train_rows must be at least 2");
}

nlohmann::json config_to_json(const ExplainerConfig& c) {
  return {{"embed_dim", c.embed_dim},   {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},       {"ffn_dim", c.ffn_dim},
          {"bucket_edges", c.bucket_edges}, {"max_features", c.max_features},
          {"max_context_rows", c.max_context_rows}, {"lr_min", c.lr_min},
          {"lr_max", c.lr_max},         {"steps", c.steps},
          {"restarts", c.restarts},     {"max_train_rows", c.max_train_rows},
          {"smooth_window", c.smooth_window}, {"clip_norm", c.clip_norm},
          {"seed", c.seed}};
}

ExplainerConfig config_from_json(const nlohmann::json& j) {
  ExplainerConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  c.bucket_edges = j.at("bucket_edges").get<std::vector<double>>();
  c.max_features = j.at("max_features").get<std::size_t>();
  c.max_context_rows = j.at("max_context_rows").get<std::size_t>();
  c.lr_min = j.at("lr_min").get<double>();
  c.lr_max = j.at("lr_max").get<double>();
  c.steps = j.at("steps").get<std::size_t>();
  c.restarts = j.at("restarts").get<std::size_t>();
  c.max_train_rows = j.at("max_train_rows").get<std::size_t>();
  c.smooth_window = j.at("smooth_window").get<std::size_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

std::size_t ExplainerWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

ExplainerWeights init_weights(const ExplainerConfig& config, std::uint64_t seed) {
  config.validate();
  ExplainerWeights w;
  w.config = config;
  Rng rng = make_rng(seed);
  std::size_t d = config.embed_dim;
  std::size_t dh = d / config.n_heads;
  std::size_t s = config.slot_count();
  auto& p = w.params;
  p["w_in"] = glorot(s, d, rng);
  p["b_in"] = ad::Tensor(ad::Shape{d});
  p["slot_emb"] = glorot(s, d, rng);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    for (const char* ln : {"ln1", "ln2"}) {
      p[layer_key(l, std::string(ln) + ".g")] = ad::Tensor(ad::Shape{d}, 1.0);
      p[layer_key(l, std::string(ln) + ".b")] = ad::Tensor(ad::Shape{d});
    }
    for (std::size_t h = 0; h < config.n_heads; ++h) {
      p[head_key(l, h, "wq")] = glorot(d, dh, rng);
      p[head_key(l, h, "wk")] = glorot(d, dh, rng);
      p[head_key(l, h, "wv")] = glorot(d, dh, rng);
      p[head_key(l, h, "wo")] = glorot(dh, d, rng);
    }
    p[layer_key(l, "bo")] = ad::Tensor(ad::Shape{d});
    p[layer_key(l, "ff1.w")] = glorot(d, config.ffn_dim, rng);
    p[layer_key(l, "ff1.b")] = ad::Tensor(ad::Shape{config.ffn_dim});
    p[layer_key(l, "ff2.w")] = glorot(config.ffn_dim, d, rng);
    p[layer_key(l, "ff2.b")] = ad::Tensor(ad::Shape{d});
  }
  p["ln_f.g"] = ad::Tensor(ad::Shape{d}, 1.0);
  p["ln_f.b"] = ad::Tensor(ad::Shape{d});
  p["head.w"] = glorot(d, config.bucket_count(), rng);
  p["head.b"] = ad::Tensor(ad::Shape{config.bucket_count()});
  return w;
}

InputStats fit_input_stats(const Matrix& x, std::span<const double> y_hat) {
  if (y_hat.size() != x.rows()) throw InvalidArgument("prediction count does not match row count");
  InputStats s;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> col = x.column(c);
    double sd = population_std(col);
    s.x_mean.push_back(mean(col));
    s.x_std.push_back(sd > 0.0 ? sd : 1.0);
  }
  s.y_mean = mean(y_hat);
  double sd = population_std(y_hat);
  s.y_std = sd > 0.0 ? sd : 1.0;
  return s;
}

Matrix slot_matrix(const Matrix& x, std::span<const double> y_hat, std::size_t feature, std::size_t max_features,
                   const InputStats* stats) {
  std::size_t m = x.cols();
  if (m > max_features) {
    throw InvalidArgument("data has " + std::to_string(m) + " features but the explainer supports at most " +
                          std::to_string(max_features));
  }
  if (feature >= m) throw InvalidArgument("feature index " + std::to_string(feature) + " out of range");
  if (y_hat.size() != x.rows()) throw InvalidArgument("prediction count does not match row count");
  if (stats && stats->x_mean.size() != m) throw InvalidArgument("input statistics do not match feature count");
  std::vector<std::size_t> order{feature};
  for (std::size_t c = 0; c < m; ++c)
    if (c != feature) order.push_back(c);
  Matrix s(x.rows(), max_features + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    s(r, 0) = stats ? (y_hat[r] - stats->y_mean) / stats->y_std : y_hat[r];
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t c = order[k];
      s(r, k + 1) = stats ? (x(r, c) - stats->x_mean[c]) / stats->x_std[c] : x(r, c);
    }
  }
  return s;
}

ad::NodeId build_tokens(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m) {
  check_features(config, m);
  std::vector<std::size_t> active(m + 1);
  std::iota(active.begin(), active.end(), std::size_t{0});
  ad::NodeId position = g.reduce_mean(g.embedding(g.input("slot_emb"), active), ad::ReduceAxis::kRows);
  return g.add(g.linear(slots, g.input("w_in"), g.input("b_in")), position);
}

ad::NodeId build_network(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m) {
  ad::NodeId h = build_tokens(g, config, slots, m);
  double scale = 1.0 / std::sqrt(static_cast<double>(config.embed_dim / config.n_heads));
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    ad::NodeId a = affine_norm(g, h, layer_key(l, "ln1"));
    ad::NodeId attn = g.input(layer_key(l, "bo"));
    for (std::size_t hd = 0; hd < config.n_heads; ++hd) {
      ad::NodeId q = g.matmul(a, g.input(head_key(l, hd, "wq")));
      ad::NodeId k = g.matmul(a, g.input(head_key(l, hd, "wk")));
      ad::NodeId v = g.matmul(a, g.input(head_key(l, hd, "wv")));
      ad::NodeId weights = g.softmax(g.scale(g.matmul(q, k, true), scale));
      ad::NodeId head = g.matmul(g.matmul(weights, v), g.input(head_key(l, hd, "wo")));
      attn = hd == 0 ? g.add(head, attn) : g.add(attn, head);
    }
    h = g.add(h, attn);
    ad::NodeId f = affine_norm(g, h, layer_key(l, "ln2"));
    f = g.relu(g.linear(f, g.input(layer_key(l, "ff1.w")), g.input(layer_key(l, "ff1.b"))));
    f = g.linear(f, g.input(layer_key(l, "ff2.w")), g.input(layer_key(l, "ff2.b")));
    h = g.add(h, f);
  }
  h = affine_norm(g, h, "ln_f");
  return g.softmax(g.linear(h, g.input("head.w"), g.input("head.b")));
}

ad::NodeId build_loss(ad::Graph& g, const ExplainerConfig& config, ad::NodeId slots, std::size_t m,
                      std::span<const double> targets) {
  std::size_t k = config.bucket_count();
  ad::Tensor onehot(ad::Shape{targets.size(), k});
  for (std::size_t t = 0; t < targets.size(); ++t) onehot[t * k + bucket_index(config.bucket_edges, targets[t])] = 1.0;
  ad::NodeId probs = build_network(g, config, slots, m);
  ad::NodeId picked = g.matmul(g.multiply(probs, g.constant(std::move(onehot), "onehot")),
                               g.constant(ad::Tensor(ad::Shape{k, 1}, 1.0), "ones"));
  return g.scale(g.reduce_mean(g.log(picked, kProbFloor)), -1.0);
}

Matrix forward(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat, std::size_t feature,
               const Matrix& x_ref, std::span<const double> y_ref) {
  const ExplainerConfig& c = w.config;
  std::size_t m = x.cols();
  check_features(c, m);
  if (x_ref.cols() != m) throw InvalidArgument("reference and query rows must have the same features");
  std::size_t total = x.rows() + x_ref.rows();
  if (total > c.max_context_rows) {
    throw InvalidArgument("context of " + std::to_string(total) + " rows exceeds max_context_rows = " +
                          std::to_string(c.max_context_rows) + "; split the queries into smaller chunks");
  }
  InputStats stats = x_ref.rows() == 0 ? fit_input_stats(x, y_hat) : fit_input_stats(x_ref, y_ref);
  Matrix ref_slots =
      x_ref.rows() == 0 ? Matrix(0, c.slot_count()) : slot_matrix(x_ref, y_ref, feature, c.max_features, &stats);
  Matrix query_slots = slot_matrix(x, y_hat, feature, c.max_features, &stats);
  std::vector<double> all = ref_slots.storage();
  all.insert(all.end(), query_slots.storage().begin(), query_slots.storage().end());

  ad::Graph g;
  g.set_check_finite(true);
  ad::NodeId slots = g.input("slots");
  ad::NodeId probs = build_network(g, c, slots, m);
  ad::TensorMap feed = w.params;
  feed["slots"] = ad::Tensor::matrix(total, c.slot_count(), std::move(all));
  const ad::Tensor& out = g.forward(feed, probs);
  std::size_t k = c.bucket_count();
  std::vector<double> tail(out.values().begin() + static_cast<std::ptrdiff_t>(x_ref.rows() * k), out.values().end());
  return Matrix(x.rows(), k, std::move(tail));
}

double point_estimate(std::span<const double> probs, std::span<const double> centers) {
  if (probs.size() != centers.size()) throw InvalidArgument("probability and center counts differ");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) total += probs[k] * centers[k];
  return total;
}

double nlpd_loss(const Matrix& probs, std::span<const double> targets, std::span<const double> edges) {
  if (probs.rows() != targets.size()) throw InvalidArgument("one target per distribution is required");
  if (probs.cols() + 1 != edges.size()) throw InvalidArgument("distribution width does not match bucket edges");
  // Extended accumulator: sums of up to 2^11 equal terms stay exact.
  long double total = 0.0L;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    total -= std::log(std::max(probs(t, bucket_index(edges, targets[t])), kProbFloor));
  }
  return static_cast<double>(total);
}

Matrix standardize_targets(const Matrix& phi, StandardizationStats* stats) {
  if (phi.empty()) throw InvalidArgument("cannot standardize an empty attribution matrix");
  StandardizationStats s;
  if (all_equal(phi.values())) {
    s.mean = phi.values().front();
  } else {
    s.mean = mean(phi.values());
    s.std = population_std(phi.values());
  }
  Matrix out = phi;
  for (double& v : out.values()) v = (v - s.mean) / s.std;
  if (stats) *stats = s;
  return out;
}

ExplainerWeights train(const TaskSource& source, const ExplainerConfig& config) {
  config.validate();
  ExplainerWeights init = init_weights(config, derive_seed(config.seed, {0}));
  std::vector<ExplainerWeights> results;
  std::vector<double> finals;

  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng lr_rng = make_rng(derive_seed(config.seed, {1, r}));
    double peak = std::exp(uniform(lr_rng, std::log(config.lr_min), std::log(config.lr_max)));
    if (config.lr_min == config.lr_max) peak = config.lr_min;
    Rng task_rng = make_rng(derive_seed(config.seed, {2}));
    ExplainerWeights w = init;
    w.meta = TrainingMetadata{};
    w.meta.peak_lr = peak;
    w.meta.chosen_restart = r;
    ad::AdamState state;
    bool failed = false;
    try {
      if (config.steps == 0) {
        TrainingTask t = subsample(source(task_rng), config.max_train_rows, task_rng);
        w.meta.initial_loss = w.meta.final_loss = task_gradients(w, t).loss;
      }
      for (std::size_t step = 0; step < config.steps; ++step) {
        TrainingTask t = subsample(source(task_rng), config.max_train_rows, task_rng);
        StepResult res = task_gradients(w, t);
        if (!std::isfinite(res.loss)) throw ad::NonFiniteError("loss is not finite");
        w.meta.loss_history.push_back(res.loss);
        clip_gradients(res.grads, config.clip_norm);
        ad::adam_step(w.params, res.grads, state, std::max(cosine_lr(peak, step, config.steps), 1e-300));
      }
    } catch (const ad::NonFiniteError& e) {
      spdlog::warn("explainer restart {} (peak lr {:.3g}) aborted at step {}: {}", r, peak,
                   w.meta.loss_history.size(), e.what());
      failed = true;
    }
    if (config.steps > 0) {
      w.meta.initial_loss = window_mean(w.meta.loss_history, false, config.smooth_window);
      w.meta.final_loss = failed ? std::numeric_limits<double>::infinity()
                                 : window_mean(w.meta.loss_history, true, config.smooth_window);
    }
    w.meta.steps = config.steps;
    finals.push_back(w.meta.final_loss);
    spdlog::info("explainer restart {}: peak lr {:.3g}, smoothed loss {:.4f} -> {:.4f}", r, peak,
                 w.meta.initial_loss, w.meta.final_loss);
    results.push_back(std::move(w));
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(finals.begin(), finals.end()) - finals.begin());
  if (!std::isfinite(finals[best])) throw Error("every explainer training restart diverged");
  ExplainerWeights out = std::move(results[best]);
  out.meta.restart_final_losses = finals;
  return out;
}

double mean_nlpd(const ExplainerWeights& weights, std::span<const TrainingTask> tasks) {
  if (tasks.empty()) throw InvalidArgument("mean_nlpd needs at least one task");
  double total = 0.0;
  for (const TrainingTask& t : tasks) {
    Matrix targets = standardize_targets(t.phi);
    double task_loss = 0.0;
    for (std::size_t j = 0; j < t.x.cols(); ++j) {
      Matrix probs = forward(weights, t.x, t.y_hat, j, Matrix(0, t.x.cols()), {});
      task_loss += nlpd_loss(probs, targets.column(j), weights.config.bucket_edges) / static_cast<double>(t.x.rows());
    }
    total += task_loss / static_cast<double>(t.x.cols());
  }
  return total / static_cast<double>(tasks.size());
}

Matrix explain_zero_shot(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat,
                         std::size_t threads) {
  return explain_zero_shot(w, x, y_hat, x, y_hat, threads);
}

Matrix explain_zero_shot(const ExplainerWeights& w, const Matrix& x, std::span<const double> y_hat,
                         const Matrix& x_ref, std::span<const double> y_ref, std::size_t threads) {
  std::size_t m = x.cols();
  check_features(w.config, m);
  // Self-context: the query rows already form the whole context.
  bool self = &x == &x_ref;
  std::vector<double> centers = bucket_centers(w.config.bucket_edges);
  Matrix phi(x.rows(), m);
  parallel_for(m, threads, [&](std::size_t j) {
    Matrix probs = self ? forward(w, x, y_hat, j, Matrix(0, m), {}) : forward(w, x, y_hat, j, x_ref, y_ref);
    for (std::size_t i = 0; i < x.rows(); ++i) phi(i, j) = point_estimate(probs.row(i), centers);
  });
  return phi;
}

void save_weights(const std::filesystem::path& path, const ExplainerWeights& w) {
  CheckpointFile file;
  file.header["format_version"] = kWeightsFormatVersion;
  file.header["config"] = config_to_json(w.config);
  file.header["meta"] = {{"steps", w.meta.steps},
                         {"chosen_restart", w.meta.chosen_restart},
                         {"peak_lr", w.meta.peak_lr},
                         {"initial_loss", w.meta.initial_loss},
                         {"final_loss", w.meta.final_loss},
                         {"restart_final_losses", w.meta.restart_final_losses},
                         {"loss_history", w.meta.loss_history}};
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, t] : w.params) {
    params.push_back({{"name", name}, {"shape", t.shape()}});
    file.payload.insert(file.payload.end(), t.values().begin(), t.values().end());
  }
  file.header["params"] = params;
  write_checkpoint(path, kMagic, file);
}

ExplainerWeights load_weights(const std::filesystem::path& path) {
  CheckpointFile file = read_checkpoint(path, kMagic);
  try {
    int version = file.header.at("format_version").get<int>();
    if (version != kWeightsFormatVersion) {
      throw FormatError("explainer weights " + path.string() + " have format_version " + std::to_string(version) +
                        ", this build reads version " + std::to_string(kWeightsFormatVersion));
    }
    ExplainerWeights w;
    w.config = config_from_json(file.header.at("config"));
    const auto& meta = file.header.at("meta");
    w.meta.steps = meta.at("steps").get<std::size_t>();
    w.meta.chosen_restart = meta.at("chosen_restart").get<std::size_t>();
    w.meta.peak_lr = meta.at("peak_lr").get<double>();
    w.meta.initial_loss = meta.at("initial_loss").get<double>();
    w.meta.final_loss = meta.at("final_loss").get<double>();
    w.meta.restart_final_losses = meta.at("restart_final_losses").get<std::vector<double>>();
    w.meta.loss_history = meta.at("loss_history").get<std::vector<double>>();
    std::size_t offset = 0;
    for (const auto& p : file.header.at("params")) {
      ad::Shape shape = p.at("shape").get<ad::Shape>();
      std::size_t size = ad::shape_size(shape);
      if (file.payload.size() - offset < size) throw FormatError("explainer weights payload is truncated");
      std::vector<double> values(file.payload.begin() + static_cast<std::ptrdiff_t>(offset),
                                 file.payload.begin() + static_cast<std::ptrdiff_t>(offset + size));
      offset += size;
      w.params[p.at("name").get<std::string>()] = ad::Tensor(std::move(shape), std::move(values));
    }
    if (offset != file.payload.size()) throw FormatError("explainer weights have trailing payload");
    ExplainerWeights reference = init_weights(w.config, 0);
    for (const auto& [name, t] : reference.params) {
      auto it = w.params.find(name);
      if (it == w.params.end() || it->second.shape() != t.shape()) {
        throw FormatError("explainer weights are missing or misshape parameter '" + name + "'");
      }
      if (!it->second.all_finite()) throw FormatError("explainer parameter '" + name + "' is not finite");
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("explainer weights " + path.string() + " have a malformed header: " + e.what());
  }
}

}  // namespace xpfn::explainer
