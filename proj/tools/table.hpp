#ifndef FROZEN_RDE_TOOLS_TABLE_HPP
#define FROZEN_RDE_TOOLS_TABLE_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace frozen_rde::cli {

/** Numbers printed with 17 significant digits; "inf" for infinity. */
inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/** A result table with `#` metadata lines, written as CSV or JSON. */
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void note(const std::string &key, const std::string &value) { meta.emplace_back(key, value); }
  void note(const std::string &key, double value) { meta.emplace_back(key, fmt(value)); }

  void add(std::vector<double> values) {
    std::vector<std::string> row;
    for (double v : values) row.push_back(fmt(v));
    rows.push_back(std::move(row));
  }
  void add_cells(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write_csv(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto &[k, v] : meta) out << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto &row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }

  void write_json(const std::string &path) const {
    nlohmann::ordered_json j;
    for (const auto &[k, v] : meta) j["meta"][k] = v;
    j["columns"] = columns;
    j["rows"] = rows;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
  }
};

} // namespace frozen_rde::cli

#endif // FROZEN_RDE_TOOLS_TABLE_HPP
