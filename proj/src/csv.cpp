#include "bicscat/csv.hpp"

#include <cmath>
#include <cstdio>

#include "bicscat/common.hpp"

namespace bicscat {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), width_(columns.size()), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw InvalidConfig("cannot write " + path);
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw InvalidConfig("row width does not match the header of " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const double* d = std::get_if<double>(&cells[i])) {
      out_ << format_number(*d);
    } else if (const long* n = std::get_if<long>(&cells[i])) {
      out_ << *n;
    } else {
      out_ << std::get<std::string>(cells[i]);
    }
  }
  out_ << '\n';
  if (!out_) throw InvalidConfig("write failed for " + path_);
  ++rows_;
}

}  // namespace bicscat
