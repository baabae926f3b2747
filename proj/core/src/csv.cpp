#include "mtmv/csv.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace mtmv {

CsvWriter::CsvWriter(std::vector<std::string> columns, bool timestamp)
    : columns_(std::move(columns)), timestamp_(timestamp) {
  if (columns_.empty()) throw std::invalid_argument("csv: need at least one column");
}

std::string CsvWriter::format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) {
    throw std::invalid_argument("csv: row width does not match the header");
  }
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_value(v));
  rows_.push_back(std::move(cells));
}

void CsvWriter::add_row_cells(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw std::invalid_argument("csv: row width does not match the header");
  }
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::to_string() const {
  std::string out;
  if (timestamp_) {
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out += "# generated ";
    out += stamp;
    out += "\r\n";
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out += ',';
    out += columns_[c];
  }
  out += "\r\n";
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += "\r\n";
  }
  return out;
}

void CsvWriter::write(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("csv: cannot open " + file.string() + " for writing");
  os << to_string();
}

}  // namespace mtmv
