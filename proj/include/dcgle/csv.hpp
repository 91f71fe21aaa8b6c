#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcgle/config.hpp"
#include "dcgle/error.hpp"

namespace dcgle {

inline constexpr const char* tool_version = "1.0.0";

using Cell = std::variant<double, std::int64_t, std::string>;

/// One CSV table plus the metadata written next to it.
struct CsvArtifact {
  std::string name;  ///< file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json meta = nlohmann::json::object();

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
      throw SchemaMismatch(name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& c) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == c) return i;
    throw SchemaMismatch(name + ": no column '" + c + "'");
  }
};

inline std::string format_cell(const Cell& c) {
  struct V {
    std::string operator()(double d) const { return format_real(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, c);
}

inline double cell_number(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return *d;
  if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw SchemaMismatch("expected a numeric cell");
}

inline std::string to_csv(const CsvArtifact& a) {
  std::string out;
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    if (i) out += ',';
    out += a.columns[i];
  }
  out += '\n';
  for (const auto& row : a.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

/// Reads back a CSV written by to_csv. Cells that parse as numbers become doubles.
inline CsvArtifact from_csv(const std::string& name, const std::string& text) {
  CsvArtifact a;
  a.name = name;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t s = 0;
    for (;;) {
      const auto c = line.find(',', s);
      cells.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
      if (c == std::string::npos) break;
      s = c + 1;
    }
    if (header) {
      a.columns = cells;
      header = false;
      continue;
    }
    std::vector<Cell> row;
    for (const auto& c : cells) {
      double d = 0.0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), d);
      if (ec == std::errc() && p == c.data() + c.size() && !c.empty())
        row.emplace_back(d);
      else
        row.emplace_back(c);
    }
    a.add_row(std::move(row));
  }
  return a;
}

/// Writes <dir>/<name>.csv and <dir>/<name>.json.
inline void write_artifact(const CsvArtifact& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / (a.name + ".csv"), std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / (a.name + ".csv")).string());
    f << to_csv(a);
  }
  nlohmann::json meta = a.meta;
  meta["columns"] = a.columns;
  meta["rows"] = a.rows.size();
  std::ofstream f(dir / (a.name + ".json"), std::ios::binary);
  if (!f) throw Error("cannot write " + (dir / (a.name + ".json")).string());
  f << meta.dump(2) << '\n';
}

}  // namespace dcgle
