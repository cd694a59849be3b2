// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "xpfn/cli/commands.hpp"

namespace xpfn::cli {

namespace fs = std::filesystem;

namespace {

int print_report(const ValidationReport& report) {
  for (const auto& c : report.checks) {
    if (!c.ok) std::cout << "FAIL " << c.target << " [" << c.check << "] " << c.detail << "\n";
  }
  std::cout << (report.ok() ? "PASS" : "FAIL") << ": " << report.checks.size() << " checks, " << report.failures()
            << " failed\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Zero-shot feature attribution toolkit"};
  app.require_subcommand(1);

  std::string config_file, output, log_level = "info";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  app.add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "Override a config key (key=value), repeatable");
  app.add_option("--seed", seed, "Master seed (default 42)");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("-o,--output-dir", output, "Output directory (overrides XPFN_OUTPUT_DIR)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* gen = app.add_subcommand("generate", "Write synthetic training triplets to the pool");
  std::size_t n_tasks = 0, workers = 0;
  gen->add_option("-n,--n-tasks", n_tasks, "Number of tasks")->required();
  gen->add_option("-w,--workers", workers, "Worker threads (default: threads)");

  app.add_subcommand("train", "Train the explainer on the pool and write a checkpoint");

  std::string data, out, model;
  auto* fit = app.add_subcommand("fit-base", "Train a base classifier on a labelled CSV");
  fit->add_option("-d,--data", data, "CSV with features and the label column")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", out, "Model file")->required();

  auto* pred = app.add_subcommand("predict", "Append base-model predictions to a CSV");
  pred->add_option("-d,--data", data, "Feature CSV")->required()->check(CLI::ExistingFile);
  pred->add_option("-m,--model", model, "Base model file")->required();
  pred->add_option("--out", out, "Output CSV")->required();

  auto* expl = app.add_subcommand("explain", "Zero-shot attributions for a CSV with a prediction column");
  expl->add_option("-d,--data", data, "CSV with features and the prediction column")->required()->check(CLI::ExistingFile);
  expl->add_option("--out", out, "Attribution CSV (default <output_dir>/attributions.csv)");

  auto* shp = app.add_subcommand("shap", "Shapley attributions of a saved base model");
  shp->add_option("-d,--data", data, "Feature CSV")->required()->check(CLI::ExistingFile);
  shp->add_option("-m,--model", model, "Base model file")->required();
  shp->add_option("--out", out, "Attribution CSV (default <output_dir>/shap.csv)");

  app.add_subcommand("benchmark", "Compare the explainer with few-shot surrogates");
  app.add_subcommand("dag-recover", "Reconstruct causal graphs from attributions");

  auto* val = app.add_subcommand("validate", "Check a pool and/or checkpoint");
  std::string pool_arg, ckpt_arg;
  val->add_option("--pool", pool_arg, "Pool directory");
  val->add_option("--checkpoint", ckpt_arg, "Explainer checkpoint");

  app.add_subcommand("show-config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_pattern("[%l] %v");
    RunConfig c;
    if (!config_file.empty()) c.merge_file(config_file);
    if (!output.empty()) c.set("output_dir", output);
    if (seed) c.set("seed", std::to_string(*seed));
    if (threads) c.set("threads", std::to_string(*threads));
    for (const std::string& o : overrides) c.set(o);

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "generate") {
      cmd_generate(c, n_tasks, workers ? workers : thread_count(c));
    } else if (name == "train") {
      cmd_train(c);
    } else if (name == "fit-base") {
      cmd_fit_base(c, data, out);
    } else if (name == "predict") {
      cmd_predict(c, data, model, out);
    } else if (name == "explain") {
      cmd_explain(c, data, out.empty() ? output_dir(c) / "attributions.csv" : fs::path(out));
    } else if (name == "shap") {
      cmd_shap(c, data, model, out.empty() ? output_dir(c) / "shap.csv" : fs::path(out));
    } else if (name == "benchmark") {
      cmd_benchmark(c);
    } else if (name == "dag-recover") {
      cmd_dag_recover(c);
    } else if (name == "validate") {
      ValidationReport report;
      fs::path p = pool_arg.empty() ? pool_dir(c) : fs::path(pool_arg);
      fs::path k = ckpt_arg.empty() ? checkpoint_path(c) : fs::path(ckpt_arg);
      bool explicit_target = !pool_arg.empty() || !ckpt_arg.empty();
      if (!pool_arg.empty() || (!explicit_target && fs::exists(p))) report = validate_pool(p);
      if (!ckpt_arg.empty() || (!explicit_target && fs::exists(k))) {
        for (auto& check : validate_checkpoint(k).checks) report.checks.push_back(std::move(check));
      }
      if (report.checks.empty()) {
        std::cerr << "nothing to validate: neither " << p << " nor " << k << " exists\n";
        return 1;
      }
      return print_report(report);
    } else if (name == "show-config") {
      std::cout << c.dump();
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace xpfn::cli
