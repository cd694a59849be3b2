// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/error.hpp"

namespace xpfn::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("CSV has no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::column(const std::string& name) const { return data.column(column_index(name)); }

CsvTable CsvTable::without(const std::vector<std::string>& names) const {
  CsvTable out;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(names.begin(), names.end(), header[c]) != names.end()) continue;
    keep.push_back(c);
    out.header.push_back(header[c]);
  }
  out.data = data.select_columns(keep);
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  std::vector<double> values;
  std::size_t rows = 0;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (table.header.empty()) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    }
    for (const std::string& cell : cells) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(origin + ":" + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (table.header.empty()) throw FormatError(origin + ": missing header row");
  table.data = Matrix(rows, table.header.size(), std::move(values));
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) out += (c ? "," : "") + table.header[c];
  out += "\n";
  for (std::size_t r = 0; r < table.data.rows(); ++r) {
    for (std::size_t c = 0; c < table.data.cols(); ++c) out += (c ? "," : "") + format_double(table.data(r, c));
    out += "\n";
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_file_atomic(path, format_csv(table)); }

}  // namespace xpfn::cli
