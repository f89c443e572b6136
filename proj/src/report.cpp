#include "eblab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eblab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ExperimentReport::add_row(std::vector<double> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("ExperimentReport: row has " + std::to_string(row.size()) +
                                " entries, header has " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

double ExperimentReport::at(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::out_of_range("ExperimentReport: no column " + column);
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

std::vector<double> ExperimentReport::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(at(r, name));
  return out;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  return out.str();
}

void ExperimentReport::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + path.string());
    csv << to_csv();
  }
  std::filesystem::path side = path;
  side.replace_extension(".json");
  if (side == path) side += ".json";
  std::ofstream js(side, std::ios::binary);
  if (!js) throw std::runtime_error("cannot open " + side.string());
  nlohmann::json doc = metadata;
  doc["name"] = name;
  doc["columns"] = columns;
  doc["rows"] = rows.size();
  js << doc.dump(2) << '\n';
}

}  // namespace eblab
