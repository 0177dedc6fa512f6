#ifndef TIKHOFLOW_CSV_HPP
#define TIKHOFLOW_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace tikhoflow::csv {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const; // -1 when absent
  std::vector<double> column(const std::string& name) const;
};

/// 17-significant-digit decimal floats; writes to a temp file in the target
/// directory and renames into place, so failed writes leave no partial file.
void write_csv(const std::filesystem::path& path, const Table& table);

Table read_csv(const std::filesystem::path& path);

std::string format17(double v);

/// Atomic small-file write (same temp+rename discipline as write_csv).
void write_text(const std::filesystem::path& path, const std::string& content);

} // namespace tikhoflow::csv

#endif
