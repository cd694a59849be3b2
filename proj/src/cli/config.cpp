// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/error.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::map<std::string, std::string>& default_settings() {
  static const std::map<std::string, std::string> defaults = {
      {"seed", "42"},
      {"threads", "1"},
      {"output_dir", "xpfn_out"},
      {"pool.dir", ""},  // empty: <output_dir>/pool
      {"pool.timeout_ms", "10000"},
      {"generator.min_nodes", "2"},
      {"generator.max_nodes", "10"},
      {"generator.max_subgraphs", "1"},
      {"generator.connect_prob", "0.5"},
      {"generator.noise_scale", "0.1"},
      {"generator.min_samples", "64"},
      {"generator.max_samples", "256"},
      {"generator.m_max", "10"},
      {"generator.quantile_lo", "0.2"},
      {"generator.quantile_hi", "0.8"},
      {"generator.max_attempts", "20"},
      {"base.kind", "mlp"},
      {"base.mlp_hidden", "100"},
      {"base.mlp_epochs", "2000"},
      {"base.mlp_lr", "1e-4"},
      {"base.forest_trees", "100"},
      {"base.forest_depth", "8"},
      {"base.standardize", "false"},
      {"shap.mode", "hybrid"},
      {"shap.exact_max_features", "10"},
      {"shap.n_permutations", "200"},
      {"shap.background_size", "64"},
      {"shap.exact_fraction", "0.5"},
      {"explainer.embed_dim", "64"},
      {"explainer.n_layers", "3"},
      {"explainer.n_heads", "4"},
      {"explainer.ffn_dim", "128"},
      {"explainer.buckets", "32"},
      {"explainer.max_features", "10"},
      {"explainer.max_context_rows", "512"},
      {"explainer.lr_min", "1e-7"},
      {"explainer.lr_max", "1e-4"},
      {"explainer.steps", "1000"},
      {"explainer.restarts", "3"},
      {"explainer.max_train_rows", "128"},
      {"explainer.smooth_window", "50"},
      {"explainer.clip_norm", "1.0"},
      {"explainer.checkpoint", ""},  // empty: <output_dir>/explainer.bin
      {"post.recenter", "true"},
      {"post.rescale", "true"},
      {"post.efficiency", "true"},
      {"data.prediction_column", "prediction"},
      {"data.label_column", "label"},
      {"benchmark.methods", "explainer,knn,forest,mlp"},
      {"benchmark.k_shots", "0,2,4,6,8,10"},
      {"benchmark.base_kinds", "mlp,forest"},
      {"benchmark.datasets", "synthetic"},
      {"benchmark.synthetic_tasks", "3"},
      {"benchmark.eval_rows", "100"},
      {"benchmark.repetitions", "3"},
      {"dag.tasks", "20"},
      {"dag.max_features", "8"},
      {"dag.budgets", "3,5,7"},
      {"dag.random_draws", "10"},
  };
  return defaults;
}

RunConfig::RunConfig() : values_(default_settings()) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) values_["output_dir"] = env;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::set(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set(line);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  merge_text(read_file(path), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("unknown config key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    long long out = std::stoll(v, &pos);
    if (pos == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key '" + key + "' expects an integer, got '" + v + "'");
}

std::size_t RunConfig::get_size(const std::string& key) const {
  long long v = get_int(key);
  if (v < 0) throw InvalidArgument("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    unsigned long long out = std::stoull(v, &pos);
    if (pos == v.size() && v.front() != '-') return out;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key '" + key + "' expects an unsigned integer, got '" + v + "'");
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key '" + key + "' expects a number, got '" + v + "'");
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const std::string& s : get_list(key)) {
    try {
      std::size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size() || v < 0) throw InvalidArgument("");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidArgument("config key '" + key + "' expects a list of non-negative integers, got '" + get(key) + "'");
    }
  }
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t master_seed(const RunConfig& c) { return c.get_u64("seed"); }

std::size_t thread_count(const RunConfig& c) { return std::max<std::size_t>(1, c.get_size("threads")); }

std::filesystem::path output_dir(const RunConfig& c) { return c.get("output_dir"); }

std::filesystem::path pool_dir(const RunConfig& c) {
  const std::string& p = c.get("pool.dir");
  return p.empty() ? output_dir(c) / "pool" : std::filesystem::path(p);
}

std::filesystem::path checkpoint_path(const RunConfig& c) {
  const std::string& p = c.get("explainer.checkpoint");
  return p.empty() ? output_dir(c) / "explainer.bin" : std::filesystem::path(p);
}

models::BaseModelConfig base_model_config(const RunConfig& c, std::uint64_t seed) {
  models::BaseModelConfig b;
  b.kind = models::parse_base_model_kind(c.get("base.kind"));
  b.mlp.hidden = {c.get_size("base.mlp_hidden")};
  b.mlp.epochs = c.get_size("base.mlp_epochs");
  b.mlp.learning_rate = c.get_double("base.mlp_lr");
  b.mlp.seed = seed;
  b.forest.n_estimators = c.get_size("base.forest_trees");
  b.forest.max_depth = c.get_size("base.forest_depth");
  b.forest.seed = seed;
  b.standardize = c.get_bool("base.standardize");
  return b;
}

scm::GeneratorConfig generator_config(const RunConfig& c) {
  scm::GeneratorConfig g;
  g.dag.min_nodes = c.get_size("generator.min_nodes");
  g.dag.max_nodes = c.get_size("generator.max_nodes");
  g.dag.max_subgraphs = c.get_size("generator.max_subgraphs");
  g.dag.connect_prob = c.get_double("generator.connect_prob");
  g.dag.noise_scale = c.get_double("generator.noise_scale");
  g.min_samples = c.get_size("generator.min_samples");
  g.max_samples = c.get_size("generator.max_samples");
  g.max_attempts = c.get_size("generator.max_attempts");
  g.task.m_max = c.get_size("generator.m_max");
  g.task.quantile_lo = c.get_double("generator.quantile_lo");
  g.task.quantile_hi = c.get_double("generator.quantile_hi");
  g.triplet.base = base_model_config(c, 0);
  g.triplet.exact_max_features = c.get_size("shap.exact_max_features");
  g.triplet.n_permutations = c.get_size("shap.n_permutations");
  g.triplet.background_size = c.get_size("shap.background_size");
  g.triplet.exact_fraction = c.get_double("shap.exact_fraction");
  return g;
}

explainer::ExplainerConfig explainer_config(const RunConfig& c) {
  explainer::ExplainerConfig e;
  e.embed_dim = c.get_size("explainer.embed_dim");
  e.n_layers = c.get_size("explainer.n_layers");
  e.n_heads = c.get_size("explainer.n_heads");
  e.ffn_dim = c.get_size("explainer.ffn_dim");
  e.bucket_edges = explainer::default_bucket_edges(c.get_size("explainer.buckets"));
  e.max_features = c.get_size("explainer.max_features");
  e.max_context_rows = c.get_size("explainer.max_context_rows");
  e.lr_min = c.get_double("explainer.lr_min");
  e.lr_max = c.get_double("explainer.lr_max");
  e.steps = c.get_size("explainer.steps");
  e.restarts = c.get_size("explainer.restarts");
  e.max_train_rows = c.get_size("explainer.max_train_rows");
  e.smooth_window = c.get_size("explainer.smooth_window");
  e.clip_norm = c.get_double("explainer.clip_norm");
  e.seed = derive_seed(master_seed(c), {3});
  e.validate();
  return e;
}

post::CorrectionConfig correction_config(const RunConfig& c) {
  post::CorrectionConfig p;
  p.enable_recenter = c.get_bool("post.recenter");
  p.enable_rescale = c.get_bool("post.rescale");
  p.enable_efficiency = c.get_bool("post.efficiency");
  return p;
}

eval::DagRecoveryConfig dag_config(const RunConfig& c) {
  eval::DagRecoveryConfig d;
  d.budgets = c.get_size_list("dag.budgets");
  d.random_draws = c.get_size("dag.random_draws");
  d.seed = derive_seed(master_seed(c), {7});
  d.threads = thread_count(c);
  return d;
}

}  // namespace xpfn::cli
