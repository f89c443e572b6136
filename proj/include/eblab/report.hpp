#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eblab {

/// Rectangular numeric table with a JSON metadata block.
struct ExperimentReport {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata = nlohmann::json::object();

  /// Throws std::invalid_argument when the row width differs from the header.
  void add_row(std::vector<double> row);
  double at(std::size_t row, const std::string& column) const;
  std::vector<double> column(const std::string& column) const;

  /// Header plus rows, comma separated, LF line endings, 17 significant digits.
  std::string to_csv() const;
  /// Writes `path` (CSV) and `path` with extension replaced by ".json" (metadata).
  void write(const std::filesystem::path& path) const;
};

/// %.17g formatting used for every number the reports emit.
std::string format_number(double x);

}  // namespace eblab
