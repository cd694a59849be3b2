// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xpfn {

// Little-endian serialization helpers. The byte order is fixed regardless of
// the host so files are portable.
void append_u64(std::string& out, std::uint64_t value);
void append_f64(std::string& out, double value);
void append_f64s(std::string& out, std::span<const double> values);

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context);
  std::uint64_t read_u64();
  double read_f64();
  std::vector<double> read_f64s(std::size_t count);
  std::string_view read_bytes(std::size_t count);
  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  void require(std::size_t count) const;
  std::string_view bytes_;
  std::size_t offset_ = 0;
  std::string context_;
};

std::uint64_t fnv1a64(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Checkpoint container shared by the base models and the explainer:
//   8-byte magic | u64 header length | JSON header | u64 count | count x f64
//   | u64 FNV-1a of all preceding bytes
struct CheckpointFile {
  nlohmann::json header;
  std::vector<double> payload;
};

void write_checkpoint(const std::filesystem::path& path, std::string_view magic, const CheckpointFile& file);
CheckpointFile read_checkpoint(const std::filesystem::path& path, std::string_view magic);
std::string encode_checkpoint(std::string_view magic, const CheckpointFile& file);
CheckpointFile decode_checkpoint(std::string_view bytes, std::string_view magic, const std::string& context);

}  // namespace xpfn
