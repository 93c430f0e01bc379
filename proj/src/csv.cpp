#include "penning/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "penning/errors.hpp"

namespace penning {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError("malformed CSV number '" + text + "'");
  }
  return v;
}

}  // namespace

void CsvTable::add_row(std::vector<double> values) {
  if (!labels.empty()) throw ConfigError("labelled table needs a row label");
  rows.push_back(std::move(values));
}

void CsvTable::add_row(std::string label, std::vector<double> values) {
  if (labels.size() != rows.size()) throw ConfigError("cannot mix labelled and unlabelled rows");
  labels.push_back(std::move(label));
  rows.push_back(std::move(values));
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  const std::size_t label_cols = table.labels.empty() ? 0 : 1;
  for (const auto& row : table.rows) {
    if (row.size() + label_cols != table.columns.size()) throw InvariantError("CSV row width does not match header");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (label_cols) out << table.labels[r];
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      out << (c || label_cols ? "," : "") << format_double(table.rows[r][c]);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file " + path.string());
  table.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.columns.size()) throw ConfigError("CSV row width does not match header");
    std::vector<double> values;
    std::size_t start = 0;
    if (has_labels) {
      table.labels.push_back(cells[0]);
      start = 1;
    }
    for (std::size_t c = start; c < cells.size(); ++c) values.push_back(parse_double(cells[c]));
    table.rows.push_back(std::move(values));
  }
  return table;
}

}  // namespace penning
