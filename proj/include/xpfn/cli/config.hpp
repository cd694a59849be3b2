// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xpfn/eval/dag_recovery.hpp"
#include "xpfn/explainer/explainer.hpp"
#include "xpfn/post/postprocess.hpp"
#include "xpfn/scm/task.hpp"

namespace xpfn::cli {

inline constexpr const char* kOutputDirEnv = "XPFN_OUTPUT_DIR";

// Flat key=value settings with dotted section names. Every key has a
// default; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  // Lines of `key = value`; '#' starts a comment.
  void merge_text(const std::string& text, const std::string& origin);
  void merge_file(const std::filesystem::path& path);
  // "key=value"
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  std::string get_string(const std::string& key) const { return get(key); }
  long long get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

// Documented defaults, one per key.
const std::map<std::string, std::string>& default_settings();

std::uint64_t master_seed(const RunConfig& c);
std::size_t thread_count(const RunConfig& c);
std::filesystem::path output_dir(const RunConfig& c);
std::filesystem::path pool_dir(const RunConfig& c);
std::filesystem::path checkpoint_path(const RunConfig& c);

scm::GeneratorConfig generator_config(const RunConfig& c);
models::BaseModelConfig base_model_config(const RunConfig& c, std::uint64_t seed);
explainer::ExplainerConfig explainer_config(const RunConfig& c);
post::CorrectionConfig correction_config(const RunConfig& c);
eval::DagRecoveryConfig dag_config(const RunConfig& c);

}  // namespace xpfn::cli
