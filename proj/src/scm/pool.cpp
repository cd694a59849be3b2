// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/scm/pool.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include <spdlog/spdlog.h>

#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/parallel.hpp"

namespace xpfn::scm {

namespace fs = std::filesystem;

std::string pool_task_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task_%08zu", index);
  return buf;
}

void pool_write(const fs::path& dir, const std::string& id, const TrainingTriplet& t) {
  std::size_t n = t.x.rows();
  std::size_t m = t.x.cols();
  if (t.y_hat.size() != n || t.phi.rows() != n || t.phi.cols() != m) {
    throw InvalidArgument("triplet dimensions are inconsistent");
  }
  std::string bytes;
  bytes.reserve((2 * n * m + n + 1) * 8);
  append_f64s(bytes, t.x.values());
  append_f64s(bytes, t.y_hat);
  append_f64s(bytes, t.phi.values());
  append_f64(bytes, t.base_value);

  const TripletProvenance& p = t.provenance;
  nlohmann::json header = {{"format_version", kPoolFormatVersion},
                           {"n", n},
                           {"m", m},
                           {"estimator", p.estimator},
                           {"base_kind", p.base_kind},
                           {"task_seed", p.task_seed},
                           {"base_seed", p.base_seed},
                           {"shap_seed", p.shap_seed},
                           {"n_permutations", p.n_permutations},
                           {"background_size", p.background_size},
                           {"payload_bytes", bytes.size()},
                           {"checksum", fnv1a64(bytes)}};
  write_file_atomic(dir / (id + ".bin"), bytes);
  write_file_atomic(dir / (id + ".json"), header.dump(2) + "\n");
}

TrainingTriplet pool_read(const fs::path& dir, const std::string& id) {
  fs::path json_path = dir / (id + ".json");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(read_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(json_path.string() + ": " + e.what());
  }
  try {
    if (h.at("format_version").get<int>() != kPoolFormatVersion) {
      throw FormatError(json_path.string() + ": unsupported format_version");
    }
    std::size_t n = h.at("n").get<std::size_t>();
    std::size_t m = h.at("m").get<std::size_t>();
    std::string bytes = read_file(dir / (id + ".bin"));
    if (bytes.size() != (2 * n * m + n + 1) * 8 || bytes.size() != h.at("payload_bytes").get<std::size_t>()) {
      throw FormatError(id + ".bin: payload size does not match header");
    }
    if (fnv1a64(bytes) != h.at("checksum").get<std::uint64_t>()) throw FormatError(id + ".bin: checksum mismatch");
    ByteReader in(bytes, id + ".bin");
    TrainingTriplet t;
    t.x = Matrix(n, m, in.read_f64s(n * m));
    t.y_hat = in.read_f64s(n);
    t.phi = Matrix(n, m, in.read_f64s(n * m));
    t.base_value = in.read_f64();
    TripletProvenance& p = t.provenance;
    p.estimator = h.at("estimator").get<std::string>();
    p.base_kind = h.at("base_kind").get<std::string>();
    p.task_seed = h.at("task_seed").get<std::uint64_t>();
    p.base_seed = h.at("base_seed").get<std::uint64_t>();
    p.shap_seed = h.at("shap_seed").get<std::uint64_t>();
    p.n_permutations = h.at("n_permutations").get<std::size_t>();
    p.background_size = h.at("background_size").get<std::size_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(json_path.string() + ": " + e.what());
  }
}

std::vector<std::string> pool_list(const fs::path& dir) {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const fs::path& p = entry.path();
    if (p.extension() == ".json" && p.stem().string().rfind("task_", 0) == 0) ids.push_back(p.stem().string());
  }
  if (ec) throw Error("cannot list pool directory " + dir.string() + ": " + ec.message());
  std::sort(ids.begin(), ids.end());
  return ids;
}

PoolSampler::PoolSampler(fs::path dir, SamplerOptions options) : dir_(std::move(dir)), options_(options) {
  if (!fs::is_directory(dir_)) throw InvalidArgument("pool directory " + dir_.string() + " does not exist");
}

std::size_t PoolSampler::skipped() const {
  std::lock_guard lock(mutex_);
  return bad_.size();
}

std::optional<TrainingTriplet> PoolSampler::load(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (bad_.count(id)) return std::nullopt;
    if (auto it = cache_.find(id); it != cache_.end()) return *it->second;
  }
  try {
    TrainingTriplet t = pool_read(dir_, id);
    if (t.max_efficiency_residual() > 1e-6 || !all_finite(t.phi.values()) || !all_finite(t.x.values())) {
      throw FormatError(id + ": triplet fails its efficiency check");
    }
    if (options_.cache) {
      std::lock_guard lock(mutex_);
      cache_.emplace(id, std::make_shared<const TrainingTriplet>(t));
    }
    return t;
  } catch (const Error& e) {
    spdlog::warn("skipping pool file {}: {}", id, e.what());
    std::lock_guard lock(mutex_);
    bad_[id] = true;
    return std::nullopt;
  }
}

TrainingTriplet PoolSampler::sample(Rng& rng) {
  auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  while (true) {
    std::vector<std::string> ids = pool_list(dir_);
    {
      std::lock_guard lock(mutex_);
      std::erase_if(ids, [&](const std::string& id) { return bad_.count(id) > 0; });
    }
    while (!ids.empty()) {
      std::size_t k = uniform_index(rng, ids.size());
      if (auto t = load(ids[k])) return std::move(*t);
      ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(k));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw PoolEmpty("no readable triplets in " + dir_.string() + " after waiting " +
                      std::to_string(options_.timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(options_.poll_interval);
  }
}

TrainingTriplet pool_sample(const fs::path& dir, Rng& rng, SamplerOptions options) {
  return PoolSampler(dir, options).sample(rng);
}

PoolGenerationStats generate_pool(const fs::path& dir, const GeneratorConfig& config, std::size_t count,
                                  std::uint64_t seed, std::size_t threads) {
  fs::create_directories(dir);
  std::vector<std::string> present = pool_list(dir);
  std::vector<std::size_t> todo;
  PoolGenerationStats stats;
  for (std::size_t i = 0; i < count; ++i) {
    if (std::binary_search(present.begin(), present.end(), pool_task_id(i))) {
      ++stats.existing;
    } else {
      todo.push_back(i);
    }
  }
  std::atomic<std::size_t> done{0};
  parallel_for(todo.size(), threads, [&](std::size_t k) {
    std::size_t i = todo[k];
    TrainingTriplet t = generate_triplet(config, derive_seed(seed, {i}));
    pool_write(dir, pool_task_id(i), t);
    std::size_t d = ++done;
    if (d % 100 == 0) spdlog::info("pool: {}/{} tasks written", d, todo.size());
  });
  stats.written = todo.size();
  return stats;
}

}  // namespace xpfn::scm
