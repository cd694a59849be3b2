// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xpfn/common/matrix.hpp"

namespace xpfn::cli {

// A header row followed by numeric rows. No quoting support.
struct CsvTable {
  std::vector<std::string> header;
  Matrix data;

  std::size_t column_index(const std::string& name) const;  // throws if missing
  bool has_column(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  // All columns except the named ones, in file order.
  CsvTable without(const std::vector<std::string>& names) const;
};

CsvTable parse_csv(const std::string& text, const std::string& origin);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace xpfn::cli
