// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xpfn/cli/config.hpp"
#include "xpfn/cli/csv.hpp"
#include "xpfn/common/error.hpp"
#include "xpfn/eval/metrics.hpp"
#include "xpfn/scm/pool.hpp"

namespace xpfn::cli {

// A required artifact is absent; the message names the subcommand that makes it.
class MissingPrerequisite : public Error {
 public:
  using Error::Error;
};

scm::PoolGenerationStats cmd_generate(const RunConfig& c, std::size_t n_tasks, std::size_t workers);

// Trains on the pool and writes the checkpoint plus train_loss.csv.
explainer::ExplainerWeights cmd_train(const RunConfig& c);

// Trains a base model on a CSV with a label column.
models::BaseModel cmd_fit_base(const RunConfig& c, const std::filesystem::path& data, const std::filesystem::path& out);

// Appends the prediction column of a saved base model to a CSV.
CsvTable cmd_predict(const RunConfig& c, const std::filesystem::path& data, const std::filesystem::path& model,
                     const std::filesystem::path& out);

// Attribution CSV (format v1): feature_1..feature_m, base_value.
inline constexpr int kAttributionCsvVersion = 1;
CsvTable attribution_table(const Matrix& phi, double base_value);

// Zero-shot attributions for a CSV of features plus the prediction column.
CsvTable cmd_explain(const RunConfig& c, const std::filesystem::path& data, const std::filesystem::path& out);

// Shapley attributions of a saved base model over a CSV of features.
CsvTable cmd_shap(const RunConfig& c, const std::filesystem::path& data, const std::filesystem::path& model,
                  const std::filesystem::path& out);

struct BenchmarkOutput {
  std::vector<eval::MetricReport> reports;
};

// Writes benchmark.csv, benchmark.json, benchmark_summary.csv (deterministic)
// and runtime.csv (wall-clock timings).
BenchmarkOutput cmd_benchmark(const RunConfig& c);

struct DagRecoverOutput {
  std::vector<eval::DagRecoveryResult> tasks;
  std::vector<double> mean_ged;
  std::vector<double> mean_random_ged;
};

// Writes dag_recovery.json and dag_ged.csv.
DagRecoverOutput cmd_dag_recover(const RunConfig& c);

struct ValidationCheck {
  std::string target;
  std::string check;
  bool ok = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  std::size_t failures() const;
};

ValidationReport validate_pool(const std::filesystem::path& dir);
ValidationReport validate_checkpoint(const std::filesystem::path& path);

// Parses argv and runs a subcommand; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace xpfn::cli
