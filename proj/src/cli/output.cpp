#include <fmt/format.h>

#include <fstream>

#include "cglb/cli.hpp"
#include "cglb/errors.hpp"

namespace cglb::cli {

// negative zero prints as 0
std::string format_number(double v) { return fmt::format("{:.17g}", v == 0.0 ? 0.0 : v); }

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvTable::add_row(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& row) {
  if (row.size() != columns_.size()) throw Error("csv row width does not match the header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out = fmt::format("# schema={} version={}\n", schema_, kSchemaVersion);
  out += fmt::format("{}\n", fmt::join(columns_, ","));
  for (const auto& r : rows_) out += fmt::format("{}\n", fmt::join(r, ","));
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << str();
}

}  // namespace cglb::cli
