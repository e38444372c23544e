#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "qctl/error.hpp"

namespace qctl::io {

/// Shortest text that round-trips the double; "." decimal regardless of locale
/// is guaranteed because the toolkit never calls setlocale.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV with a header row and '\n' line endings, built in memory and written
/// in one go.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { add_row_text(header); }

  void add_row(std::initializer_list<double> values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add_row_text(cells);
  }

  void add_row_text(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                              std::to_string(columns_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace qctl::io
