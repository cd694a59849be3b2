// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "xpfn/scm/task.hpp"

namespace xpfn::scm {

inline constexpr int kPoolFormatVersion = 1;

// File stem for task index i: "task_00000042".
std::string pool_task_id(std::size_t index);

// Writes <dir>/<id>.bin (X, y_hat, phi row-major f64 LE, then v) and then
// the <id>.json header. Both are renamed into place, the header last, so a
// visible header always has a complete payload.
void pool_write(const std::filesystem::path& dir, const std::string& id, const TrainingTriplet& triplet);
TrainingTriplet pool_read(const std::filesystem::path& dir, const std::string& id);

// Ids with a committed header, sorted.
std::vector<std::string> pool_list(const std::filesystem::path& dir);

struct SamplerOptions {
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds poll_interval{50};
  bool cache = false;  // keep loaded triplets in memory
};

class PoolEmpty : public Error {
 public:
  using Error::Error;
};

// Uniform sampling with replacement over committed files. Unreadable or
// inconsistent files are logged and skipped. Safe to share across threads.
class PoolSampler {
 public:
  explicit PoolSampler(std::filesystem::path dir, SamplerOptions options = {});

  TrainingTriplet sample(Rng& rng);
  std::size_t skipped() const;

 private:
  std::optional<TrainingTriplet> load(const std::string& id);

  std::filesystem::path dir_;
  SamplerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const TrainingTriplet>> cache_;
  std::map<std::string, bool> bad_;
};

TrainingTriplet pool_sample(const std::filesystem::path& dir, Rng& rng, SamplerOptions options = {});

struct PoolGenerationStats {
  std::size_t written = 0;
  std::size_t existing = 0;
};

// Fills task ids [0, count) that are not yet committed. Task i derives its
// seed from (seed, i), so the pool does not depend on the thread count.
PoolGenerationStats generate_pool(const std::filesystem::path& dir, const GeneratorConfig& config, std::size_t count,
                                  std::uint64_t seed, std::size_t threads);

}  // namespace xpfn::scm
