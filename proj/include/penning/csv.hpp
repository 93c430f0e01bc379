#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Numeric CSV tables with an optional leading text label column. Values are
// written with 17 significant digits so a read-back reproduces every double.

namespace penning {

struct CsvTable {
  std::vector<std::string> columns;        // includes the label column name when labels are used
  std::vector<std::string> labels;         // empty, or one per row
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> values);
  void add_row(std::string label, std::vector<double> values);
  bool operator==(const CsvTable&) const = default;
};

std::string format_double(double value);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
// has_labels selects whether the first column is read as text.
CsvTable read_csv(const std::filesystem::path& path, bool has_labels = false);

}  // namespace penning
