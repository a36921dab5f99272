#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace bicscat {

// 12 significant digits in scientific notation; "nan" and "inf" spelled out.
std::string format_number(double v);

// 64-bit FNV-1a of the bytes of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Comma-separated table with a fixed header. Numbers go through
/// format_number, so equal inputs give byte-identical files.
class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;

  CsvWriter(const std::string& path, std::vector<std::string> columns);

  void row(const std::vector<Cell>& cells);
  long rows() const { return rows_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t width_;
  std::ofstream out_;
  long rows_ = 0;
};

}  // namespace bicscat
