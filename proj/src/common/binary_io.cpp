// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/common/binary_io.hpp"

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "xpfn/common/error.hpp"

namespace xpfn {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return out;
  }
}

}  // namespace

void append_u64(std::string& out, std::uint64_t value) {
  const std::uint64_t le = to_little(value);
  char buf[8];
  std::memcpy(buf, &le, 8);
  out.append(buf, 8);
}

void append_f64(std::string& out, double value) { append_u64(out, std::bit_cast<std::uint64_t>(value)); }

void append_f64s(std::string& out, std::span<const double> values) {
  out.reserve(out.size() + values.size() * 8);
  for (double v : values) append_f64(out, v);
}

ByteReader::ByteReader(std::string_view bytes, std::string context)
    : bytes_(bytes), context_(std::move(context)) {}

void ByteReader::require(std::size_t count) const {
  if (remaining() < count) {
    throw FormatError(context_ + ": truncated (needed " + std::to_string(count) + " bytes at offset " +
                      std::to_string(offset_) + ", " + std::to_string(remaining()) + " left)");
  }
}

std::uint64_t ByteReader::read_u64() {
  require(8);
  std::uint64_t le = 0;
  std::memcpy(&le, bytes_.data() + offset_, 8);
  offset_ += 8;
  return to_little(le);
}

double ByteReader::read_f64() { return std::bit_cast<double>(read_u64()); }

std::vector<double> ByteReader::read_f64s(std::size_t count) {
  if (count > remaining() / 8) require(count * 8);
  std::vector<double> out(count);
  for (auto& v : out) v = read_f64();
  return out;
}

std::string_view ByteReader::read_bytes(std::size_t count) {
  require(count);
  auto out = bytes_.substr(offset_, count);
  offset_ += count;
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  static std::atomic<std::uint64_t> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string encode_checkpoint(std::string_view magic, const CheckpointFile& file) {
  if (magic.size() != 8) throw InvalidArgument("checkpoint magic must be 8 bytes");
  const std::string header = file.header.dump();
  std::string out(magic);
  append_u64(out, header.size());
  out += header;
  append_u64(out, file.payload.size());
  append_f64s(out, file.payload);
  append_u64(out, fnv1a64(out));
  return out;
}

CheckpointFile decode_checkpoint(std::string_view bytes, std::string_view magic, const std::string& context) {
  if (bytes.size() < 16) throw FormatError(context + ": truncated checkpoint");
  ByteReader tail(bytes.substr(bytes.size() - 8), context);
  if (tail.read_u64() != fnv1a64(bytes.substr(0, bytes.size() - 8))) {
    throw FormatError(context + ": checksum mismatch, file is corrupt");
  }
  bytes.remove_suffix(8);
  ByteReader reader(bytes, context);
  if (reader.read_bytes(8) != magic) throw FormatError(context + ": bad magic, not a checkpoint of this kind");
  CheckpointFile file;
  const auto header_len = reader.read_u64();
  const auto header = reader.read_bytes(header_len);
  try {
    file.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(context + ": malformed header: " + e.what());
  }
  const auto count = reader.read_u64();
  file.payload = reader.read_f64s(count);
  if (reader.remaining() != 0) throw FormatError(context + ": trailing bytes after payload");
  return file;
}

void write_checkpoint(const std::filesystem::path& path, std::string_view magic, const CheckpointFile& file) {
  write_file_atomic(path, encode_checkpoint(magic, file));
}

CheckpointFile read_checkpoint(const std::filesystem::path& path, std::string_view magic) {
  return decode_checkpoint(read_file(path), magic, path.string());
}

}  // namespace xpfn
