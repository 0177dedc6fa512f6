#include "tikhoflow/csv.hpp"

#include "tikhoflow/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tikhoflow::csv {

namespace fs = std::filesystem;

int Table::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw MissingColumn(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[static_cast<size_t>(idx)]);
  return out;
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunFailure("WriteFailed", "cannot open " + tmp.string());
    out << content;
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw RunFailure("WriteFailed", "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

void write_csv(const fs::path& path, const Table& table) {
  std::ostringstream os;
  for (size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw RunFailure("CsvShape", "row width does not match header");
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format17(row[i]);
    os << "\n";
  }
  write_text(path, os.str());
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("FileNotFound", path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw EmptyData("empty file: " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str())
        throw ParseError("bad number '" + cell + "' in " + path.string());
      row.push_back(v);
    }
    if (row.size() != table.columns.size())
      throw ParseError("ragged row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

} // namespace tikhoflow::csv
