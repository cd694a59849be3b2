// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/rng.hpp"
#include "xpfn/fewshot/surrogate.hpp"
#include "xpfn/models/base_model.hpp"
#include "xpfn/post/postprocess.hpp"
#include "xpfn/shap/shapley.hpp"

namespace xpfn::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const std::string& what, const std::string& producer) {
  if (!fs::exists(p)) {
    throw MissingPrerequisite(what + " " + p.string() + " does not exist; run `xpfn " + producer + "` first");
  }
}

explainer::ExplainerWeights load_checkpoint(const RunConfig& c) {
  fs::path p = checkpoint_path(c);
  require_file(p, "explainer checkpoint", "train");
  return explainer::load_weights(p);
}

models::BaseModel load_base(const fs::path& p) {
  require_file(p, "base model", "fit-base");
  return models::load_base_model(p);
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(p, text);
}

void write_table(const fs::path& p, const CsvTable& t) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_csv(p, t);
}

// Feature columns of a data CSV: everything except label and prediction.
CsvTable feature_columns(const RunConfig& c, const CsvTable& t) {
  CsvTable f = t.without({c.get("data.label_column"), c.get("data.prediction_column")});
  if (f.header.empty()) throw InvalidArgument("data has no feature columns");
  return f;
}

std::optional<double> safe_pearson(const Matrix& a, const Matrix& b) {
  try {
    return eval::pearson(a, b);
  } catch (const eval::UndefinedCorrelation& e) {
    spdlog::warn("pearson undefined: {}", e.what());
    return std::nullopt;
  }
}

}  // namespace

scm::PoolGenerationStats cmd_generate(const RunConfig& c, std::size_t n_tasks, std::size_t workers) {
  fs::path dir = pool_dir(c);
  auto stats = scm::generate_pool(dir, generator_config(c), n_tasks, master_seed(c), std::max<std::size_t>(1, workers));
  spdlog::info("generate: {} written, {} already present in {}", stats.written, stats.existing, dir.string());
  return stats;
}

explainer::ExplainerWeights cmd_train(const RunConfig& c) {
  fs::path dir = pool_dir(c);
  if (!fs::exists(dir) || scm::pool_list(dir).empty()) {
    throw MissingPrerequisite("pool " + dir.string() + " has no tasks; run `xpfn generate` first");
  }
  explainer::ExplainerConfig ecfg = explainer_config(c);
  scm::SamplerOptions opts;
  opts.timeout = std::chrono::milliseconds(c.get_size("pool.timeout_ms"));
  opts.cache = true;
  scm::PoolSampler sampler(dir, opts);
  explainer::TaskSource source = [&](Rng& rng) {
    scm::TrainingTriplet t = sampler.sample(rng);
    return explainer::TrainingTask{std::move(t.x), std::move(t.y_hat), std::move(t.phi)};
  };
  explainer::ExplainerWeights w = explainer::train(source, ecfg);
  fs::path out = checkpoint_path(c);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  explainer::save_weights(out, w);

  CsvTable loss{{"step", "loss"}, Matrix(w.meta.loss_history.size(), 2)};
  for (std::size_t s = 0; s < w.meta.loss_history.size(); ++s) {
    loss.data(s, 0) = static_cast<double>(s);
    loss.data(s, 1) = w.meta.loss_history[s];
  }
  write_table(output_dir(c) / "train_loss.csv", loss);
  spdlog::info("train: restart {} chosen, smoothed loss {:.4f} -> {:.4f}, wrote {}", w.meta.chosen_restart,
               w.meta.initial_loss, w.meta.final_loss, out.string());
  if (sampler.skipped() > 0) spdlog::warn("train: skipped {} unreadable pool entries", sampler.skipped());
  return w;
}

models::BaseModel cmd_fit_base(const RunConfig& c, const fs::path& data, const fs::path& out) {
  CsvTable t = read_csv(data);
  std::vector<double> y = t.column(c.get("data.label_column"));
  CsvTable f = feature_columns(c, t);
  models::BaseModel model = models::train_base_model(f.data, y, base_model_config(c, derive_seed(master_seed(c), {4})));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  models::save_base_model(out, model);
  spdlog::info("fit-base: {} model on {} rows x {} features, wrote {}", models::to_string(model.kind()), f.data.rows(),
               f.data.cols(), out.string());
  return model;
}

CsvTable cmd_predict(const RunConfig& c, const fs::path& data, const fs::path& model_path, const fs::path& out) {
  CsvTable t = read_csv(data);
  CsvTable f = feature_columns(c, t);
  models::BaseModel model = load_base(model_path);
  std::vector<double> p = model.predict(f.data);
  CsvTable result = f;
  result.header.push_back(c.get("data.prediction_column"));
  Matrix joined(f.data.rows(), f.data.cols() + 1);
  for (std::size_t i = 0; i < joined.rows(); ++i) {
    for (std::size_t j = 0; j < f.data.cols(); ++j) joined(i, j) = f.data(i, j);
    joined(i, f.data.cols()) = p[i];
  }
  result.data = std::move(joined);
  write_table(out, result);
  return result;
}

CsvTable attribution_table(const Matrix& phi, double base_value) {
  CsvTable t;
  for (std::size_t j = 0; j < phi.cols(); ++j) t.header.push_back("feature_" + std::to_string(j + 1));
  t.header.push_back("base_value");
  t.data = Matrix(phi.rows(), phi.cols() + 1);
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    for (std::size_t j = 0; j < phi.cols(); ++j) t.data(i, j) = phi(i, j);
    t.data(i, phi.cols()) = base_value;
  }
  return t;
}

CsvTable cmd_explain(const RunConfig& c, const fs::path& data, const fs::path& out) {
  CsvTable t = read_csv(data);
  std::vector<double> y = t.column(c.get("data.prediction_column"));
  CsvTable f = feature_columns(c, t);
  explainer::ExplainerWeights w = load_checkpoint(c);
  post::CorrectionConfig corr = correction_config(c);
  double v = mean(y);
  corr.base_value = v;
  Matrix phi = post::full_pipeline(explainer::explain_zero_shot(w, f.data, y, thread_count(c)), y, corr);
  CsvTable table = attribution_table(phi, v);
  write_table(out, table);
  spdlog::info("explain: {} rows x {} features, wrote {}", phi.rows(), phi.cols(), out.string());
  return table;
}

CsvTable cmd_shap(const RunConfig& c, const fs::path& data, const fs::path& model_path, const fs::path& out) {
  CsvTable f = feature_columns(c, read_csv(data));
  models::BaseModel model = load_base(model_path);
  if (model.input_dim() != f.data.cols()) {
    throw InvalidArgument("base model expects " + std::to_string(model.input_dim()) + " features, data has " +
                          std::to_string(f.data.cols()));
  }
  std::uint64_t seed = derive_seed(master_seed(c), {5});
  Rng rng(seed);
  std::size_t bg = std::min(c.get_size("shap.background_size"), f.data.rows());
  shap::ShapConfig cfg;
  cfg.mode = shap::parse_shap_mode(c.get("shap.mode"));
  cfg.exact_max_features = c.get_size("shap.exact_max_features");
  cfg.n_permutations = c.get_size("shap.n_permutations");
  cfg.background = f.data.select_rows(sample_without_replacement(rng, f.data.rows(), bg));
  cfg.seed = derive_seed(seed, {1});
  cfg.threads = thread_count(c);
  shap::ShapResult r = shap::hybrid_shapley([&](const Matrix& x) { return model.predict(x); }, f.data, cfg);
  CsvTable table = attribution_table(r.phi, r.base_value);
  write_table(out, table);
  spdlog::info("shap: {} estimator over {} rows, wrote {}", r.estimator, r.phi.rows(), out.string());
  return table;
}

namespace {

struct Dataset {
  std::string name;
  Matrix x;
  std::vector<double> y;
};

std::vector<Dataset> benchmark_datasets(const RunConfig& c) {
  std::vector<Dataset> out;
  for (const std::string& entry : c.get_list("benchmark.datasets")) {
    if (entry == "synthetic") {
      scm::GeneratorConfig gen = generator_config(c);
      for (std::size_t t = 0; t < c.get_size("benchmark.synthetic_tasks"); ++t) {
        scm::ScmTask task = scm::generate_task(gen, derive_seed(master_seed(c), {11, t}));
        out.push_back({"synthetic_" + std::to_string(t), task.features(), task.labels});
      }
    } else {
      CsvTable t = read_csv(entry);
      out.push_back({fs::path(entry).stem().string(), feature_columns(c, t).data, t.column(c.get("data.label_column"))});
    }
  }
  return out;
}

struct RuntimeRow {
  std::string dataset, method, base_kind;
  std::size_t k_shots = 0;
  double seconds = 0.0;
  double per_thousand = 0.0;
};

}  // namespace

BenchmarkOutput cmd_benchmark(const RunConfig& c) {
  std::uint64_t seed = master_seed(c);
  std::vector<std::string> methods = c.get_list("benchmark.methods");
  std::vector<std::size_t> shots = c.get_size_list("benchmark.k_shots");
  std::vector<std::string> kinds = c.get_list("benchmark.base_kinds");
  std::size_t reps = c.get_size("benchmark.repetitions");
  std::size_t threads = thread_count(c);
  auto wants = [&](const std::string& m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  for (const std::string& m : methods) {
    if (m != "explainer") fewshot::parse_surrogate_kind(m);
  }
  std::size_t k_max = shots.empty() ? 0 : *std::max_element(shots.begin(), shots.end());
  if (k_max > fewshot::kMaxReferences) throw InvalidArgument("benchmark.k_shots values must not exceed 32");

  std::optional<explainer::ExplainerWeights> weights;
  if (wants("explainer") && std::count(shots.begin(), shots.end(), 0)) weights = load_checkpoint(c);

  BenchmarkOutput result;
  std::vector<RuntimeRow> runtimes;
  std::vector<Dataset> datasets = benchmark_datasets(c);
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const Dataset& ds = datasets[di];
    std::size_t n = ds.x.rows(), m = ds.x.cols();
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
      RunConfig local = c;
      local.set("base.kind", kinds[ki]);
      std::string kind = models::to_string(models::parse_base_model_kind(kinds[ki]));
      Rng rng(derive_seed(seed, {12, di, ki}));
      std::vector<std::size_t> order = sample_without_replacement(rng, n, n);
      std::size_t n_train = n / 2;
      if (n_train < 16 || n - n_train < k_max + 2) {
        spdlog::warn("benchmark: {} has too few rows ({}), skipped", ds.name, n);
        continue;
      }
      std::vector<std::size_t> train_rows(order.begin(), order.begin() + n_train);
      Matrix x_train = ds.x.select_rows(train_rows);
      std::vector<double> y_train;
      for (std::size_t r : train_rows) y_train.push_back(ds.y[r]);
      std::optional<models::BaseModel> model;
      try {
        model = models::train_base_model(x_train, y_train, base_model_config(local, derive_seed(seed, {13, di, ki})));
      } catch (const Error& e) {
        spdlog::warn("benchmark: base model on {} failed ({}), skipped", ds.name, e.what());
        continue;
      }
      shap::PredictFn predict = [&](const Matrix& x) { return model->predict(x); };

      std::size_t n_eval = std::min({c.get_size("benchmark.eval_rows"), n - n_train - k_max,
                                     c.get_size("explainer.max_context_rows")});
      std::vector<std::size_t> ref_rows(order.begin() + n_train, order.begin() + n_train + k_max);
      std::vector<std::size_t> eval_rows(order.begin() + n_train + k_max, order.begin() + n_train + k_max + n_eval);
      std::vector<std::size_t> explained = ref_rows;
      explained.insert(explained.end(), eval_rows.begin(), eval_rows.end());
      Matrix x_exp = ds.x.select_rows(explained);
      std::vector<double> y_exp = predict(x_exp);

      shap::ShapConfig scfg;
      scfg.exact_max_features = c.get_size("shap.exact_max_features");
      scfg.n_permutations = c.get_size("shap.n_permutations");
      Rng bg_rng(derive_seed(seed, {14, di, ki}));
      scfg.background = x_train.select_rows(
          sample_without_replacement(bg_rng, n_train, std::min(c.get_size("shap.background_size"), n_train)));
      scfg.seed = derive_seed(seed, {15, di, ki});
      scfg.threads = threads;
      auto t0 = std::chrono::steady_clock::now();
      shap::ShapResult ref = shap::hybrid_shapley(predict, x_exp, scfg);
      double shap_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      runtimes.push_back({ds.name, "shap_" + ref.estimator, kind, 0, shap_seconds,
                          eval::per_thousand_contributions(shap_seconds, x_exp.rows() * m)});

      std::vector<std::size_t> eval_idx(n_eval);
      std::iota(eval_idx.begin(), eval_idx.end(), k_max);
      Matrix x_eval = x_exp.select_rows(eval_idx);
      std::vector<double> y_eval(y_exp.begin() + static_cast<std::ptrdiff_t>(k_max), y_exp.end());
      Matrix phi_eval = ref.phi.select_rows(eval_idx);

      auto record = [&](const std::string& method, std::size_t k, const Matrix& phi, double seconds) {
        eval::MetricReport r;
        r.dataset = ds.name;
        r.method = method;
        r.k_shots = k;
        r.base_kind = kind;
        r.seed = seed;
        r.pearson = safe_pearson(phi, phi_eval);
        r.jaccard_topk = eval::mean_jaccard_topk(phi, phi_eval);
        r.runtime_seconds = seconds;
        result.reports.push_back(r);
        runtimes.push_back({ds.name, method, kind, k, seconds, eval::per_thousand_contributions(seconds, phi.size())});
      };

      for (std::size_t k : shots) {
        if (k == 0) {
          if (!weights) continue;
          if (m > weights->config.max_features) {
            spdlog::warn("benchmark: {} has {} features, above the explainer limit", ds.name, m);
            continue;
          }
          post::CorrectionConfig corr = correction_config(c);
          Matrix phi;
          double secs = eval::measure_runtime(
              [&] { phi = post::full_pipeline(explainer::explain_zero_shot(*weights, x_eval, y_eval), y_eval, corr); },
              reps);
          record("explainer", 0, phi, secs);
          continue;
        }
        fewshot::ReferenceSet refs;
        std::vector<std::size_t> first(k);
        std::iota(first.begin(), first.end(), std::size_t{0});
        refs.x = x_exp.select_rows(first);
        refs.y_hat.assign(y_exp.begin(), y_exp.begin() + static_cast<std::ptrdiff_t>(k));
        refs.phi = ref.phi.select_rows(first);
        for (const std::string& method : methods) {
          if (method == "explainer") continue;
          fewshot::SurrogateKind sk = fewshot::parse_surrogate_kind(method);
          if (k < fewshot::min_references(sk)) continue;
          fewshot::SurrogateConfig scfg_few;
          scfg_few.threads = threads;
          Matrix phi;
          double secs = eval::measure_runtime(
              [&] {
                auto g = fewshot::fit_surrogate(sk, refs, scfg_few, derive_seed(seed, {16, di, ki, k}));
                phi = fewshot::predict_surrogate(g, x_eval, y_eval, threads);
              },
              reps);
          record(fewshot::to_string(sk), k, phi, secs);
        }
      }
    }
  }

  fs::path dir = output_dir(c);
  std::string csv = eval::report_csv_header(false) + "\n";
  nlohmann::json json = nlohmann::json::array();
  for (const auto& r : result.reports) {
    csv += eval::report_csv_row(r, false) + "\n";
    json.push_back(eval::report_to_json(r, false));
  }
  write_text(dir / "benchmark.csv", csv);
  write_text(dir / "benchmark.json", json.dump(2) + "\n");

  // Mean over datasets, one row per method x shots x base model.
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<const eval::MetricReport*>> groups;
  for (const auto& r : result.reports) groups[{r.method, r.k_shots, r.base_kind}].push_back(&r);
  std::string summary = "method,k_shots,base_kind,datasets,mean_pearson,mean_jaccard_topk\n";
  for (const auto& [key, rows] : groups) {
    double p = 0.0, jac = 0.0;
    std::size_t defined = 0;
    for (const auto* r : rows) {
      if (r->pearson) p += *r->pearson, ++defined;
      jac += r->jaccard_topk;
    }
    summary += fmt::format("{},{},{},{},{},{}\n", std::get<0>(key), std::get<1>(key), std::get<2>(key), rows.size(),
                           defined ? format_double(p / defined) : "nan", format_double(jac / rows.size()));
  }
  write_text(dir / "benchmark_summary.csv", summary);

  std::string rt = "dataset,method,k_shots,base_kind,seconds,seconds_per_1000_contributions\n";
  for (const auto& r : runtimes) {
    rt += fmt::format("{},{},{},{},{:.6g},{:.6g}\n", r.dataset, r.method, r.k_shots, r.base_kind, r.seconds,
                      r.per_thousand);
  }
  write_text(dir / "runtime.csv", rt);
  spdlog::info("benchmark: {} rows written to {}", result.reports.size(), dir.string());
  return result;
}

DagRecoverOutput cmd_dag_recover(const RunConfig& c) {
  explainer::ExplainerWeights w = load_checkpoint(c);
  std::uint64_t seed = master_seed(c);
  scm::GeneratorConfig gen = generator_config(c);
  gen.task.m_max = c.get_size("dag.max_features");
  if (gen.task.m_max < 2) throw InvalidArgument("dag.max_features must be at least 2");
  if (gen.task.m_max - 1 > w.config.max_features) {
    throw InvalidArgument("dag.max_features - 1 exceeds the explainer limit of " +
                          std::to_string(w.config.max_features));
  }
  gen.dag.min_nodes = std::max<std::size_t>(gen.dag.min_nodes, 3);
  eval::DagRecoveryConfig dcfg = dag_config(c);
  DagRecoverOutput out;
  out.mean_ged.assign(dcfg.budgets.size(), 0.0);
  out.mean_random_ged.assign(dcfg.budgets.size(), 0.0);
  nlohmann::json tasks = nlohmann::json::array();
  std::size_t n_tasks = c.get_size("dag.tasks");
  for (std::size_t t = 0; t < n_tasks; ++t) {
    std::optional<scm::ScmTask> task;
    for (std::size_t attempt = 0; attempt < 100 && !task; ++attempt) {
      scm::ScmTask candidate = scm::generate_task(gen, derive_seed(seed, {17, t, attempt}));
      if (candidate.feature_nodes.size() >= 2) task = std::move(candidate);
    }
    if (!task) throw Error("could not draw a task with at least two features");
    std::size_t rows = std::min(task->samples.rows(), w.config.max_context_rows);
    std::vector<std::size_t> keep(rows);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    task->samples = task->samples.select_rows(keep);
    eval::DagRecoveryConfig per_task = dcfg;
    per_task.seed = derive_seed(dcfg.seed, {t});
    eval::DagRecoveryResult r = eval::dag_recovery(w, *task, per_task);
    for (std::size_t b = 0; b < r.budgets.size(); ++b) {
      out.mean_ged[b] += r.ged[b] / static_cast<double>(n_tasks);
      out.mean_random_ged[b] += r.random_ged[b] / static_cast<double>(n_tasks);
    }
    nlohmann::json j = eval::recovery_to_json(r);
    j["task_seed"] = task->seed;
    tasks.push_back(j);
    out.tasks.push_back(std::move(r));
  }
  fs::path dir = output_dir(c);
  nlohmann::json doc = {{"budgets", dcfg.budgets},
                        {"mean_ged", out.mean_ged},
                        {"mean_random_ged", out.mean_random_ged},
                        {"tasks", tasks}};
  write_text(dir / "dag_recovery.json", doc.dump(2) + "\n");
  std::string csv = "budget,mean_ged,mean_random_ged\n";
  for (std::size_t b = 0; b < dcfg.budgets.size(); ++b) {
    csv += fmt::format("{},{},{}\n", dcfg.budgets[b], format_double(out.mean_ged[b]),
                       format_double(out.mean_random_ged[b]));
  }
  write_text(dir / "dag_ged.csv", csv);
  spdlog::info("dag-recover: {} tasks, wrote {}", n_tasks, (dir / "dag_ged.csv").string());
  return out;
}

bool ValidationReport::ok() const { return failures() == 0; }

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.ok; }));
}

namespace {

// Largest residual accepted for a stored triplet.
constexpr double kEfficiencyTolerance = 1e-6;

void check_triplet(ValidationReport& report, const std::string& target, const scm::TrainingTriplet& t) {
  auto add = [&](const std::string& name, bool ok, std::string detail = {}) {
    report.checks.push_back({target, name, ok, std::move(detail)});
  };
  std::size_t n = t.x.rows(), m = t.x.cols();
  bool shapes = n > 0 && m > 0 && t.y_hat.size() == n && t.phi.rows() == n && t.phi.cols() == m;
  add("shapes", shapes, fmt::format("x {}x{}, y_hat {}, phi {}x{}", n, m, t.y_hat.size(), t.phi.rows(), t.phi.cols()));
  if (!shapes) return;
  bool finite = all_finite(t.x.values()) && all_finite(t.y_hat) && all_finite(t.phi.values()) &&
                std::isfinite(t.base_value);
  add("finite", finite);
  bool probs = std::all_of(t.y_hat.begin(), t.y_hat.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
  add("prediction_range", probs, probs ? "" : "y_hat outside [0, 1]");
  double res = t.max_efficiency_residual();
  add("efficiency", res <= kEfficiencyTolerance, fmt::format("max residual {:.3g}", res));
  const std::string& est = t.provenance.estimator;
  add("estimator", est == "exact" || est == "permutation", "estimator '" + est + "'");
}

}  // namespace

ValidationReport validate_pool(const fs::path& dir) {
  ValidationReport report;
  if (!fs::is_directory(dir)) {
    report.checks.push_back({dir.string(), "exists", false, "pool directory not found"});
    return report;
  }
  std::vector<std::string> ids = scm::pool_list(dir);
  report.checks.push_back({dir.string(), "listing", true, fmt::format("{} committed tasks", ids.size())});
  for (const std::string& id : ids) {
    std::string target = (dir / (id + ".bin")).string();
    try {
      check_triplet(report, target, scm::pool_read(dir, id));
    } catch (const std::exception& e) {
      report.checks.push_back({target, "readable", false, e.what()});
    }
  }
  return report;
}

ValidationReport validate_checkpoint(const fs::path& path) {
  ValidationReport report;
  std::string target = path.string();
  explainer::ExplainerWeights w;
  try {
    w = explainer::load_weights(path);
    report.checks.push_back({target, "readable", true, ""});
  } catch (const std::exception& e) {
    report.checks.push_back({target, "readable", false, e.what()});
    return report;
  }
  try {
    w.config.validate();
    report.checks.push_back({target, "config", true, ""});
  } catch (const std::exception& e) {
    report.checks.push_back({target, "config", false, e.what()});
  }
  explainer::ExplainerWeights fresh = explainer::init_weights(w.config, 0);
  bool names = fresh.params.size() == w.params.size();
  bool finite = true;
  for (const auto& [name, t] : w.params) {
    auto it = fresh.params.find(name);
    names = names && it != fresh.params.end() && it->second.shape() == t.shape();
    finite = finite && all_finite(t.values());
  }
  report.checks.push_back({target, "parameters", names, names ? "" : "parameter names or shapes differ from config"});
  report.checks.push_back({target, "finite", finite, ""});

  fs::path copy = fs::temp_directory_path() / fmt::format("xpfn_validate_{}.bin", fnv1a64(target));
  try {
    explainer::save_weights(copy, w);
    bool same = read_file(copy) == read_file(path);
    report.checks.push_back({target, "round_trip", same, same ? "" : "re-saved bytes differ"});
  } catch (const std::exception& e) {
    report.checks.push_back({target, "round_trip", false, e.what()});
  }
  std::error_code ec;
  fs::remove(copy, ec);
  return report;
}

}  // namespace xpfn::cli
