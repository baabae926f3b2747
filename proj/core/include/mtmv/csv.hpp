#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mtmv {

/// RFC-4180 table writer for numeric experiment outputs: CRLF rows, '.'
/// decimal separator, 17 significant digits. The optional generation
/// timestamp is a leading '#' comment line so that bodies stay
/// byte-identical across reruns.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns, bool timestamp = true);

  void add_row(const std::vector<double>& values);
  /// Mixed row for tables with a leading label or flag column.
  void add_row_cells(std::vector<std::string> cells);

  std::string to_string() const;
  void write(const std::filesystem::path& file) const;

  static std::string format_value(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  bool timestamp_;
};

}  // namespace mtmv
