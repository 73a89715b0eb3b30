#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mhlr/types.hpp"

namespace mhlr::csv {

/// Formats a double so that it parses back to the identical bit pattern.
inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& text, const std::string& path,
                           std::size_t row, std::size_t col) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw io_error(path + ": cannot parse '" + text + "' as a number at row " +
                   std::to_string(row) + ", column " + std::to_string(col));
  }
  return value;
}

}  // namespace detail

/// Reads a rectangular CSV of decimal floats, one example per row, no header.
inline Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row[c] = detail::parse_double(fields[c], path, line_no, c);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw io_error(path + ": row " + std::to_string(line_no) + " has " +
                     std::to_string(row.size()) + " columns, expected " +
                     std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    ++line_no;
  }
  if (rows.empty()) throw io_error(path + ": file holds no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

/// Reads a single-column CSV of integers (labels, masks).
inline std::vector<long> read_int_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<long> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* begin = line.c_str();
    char* end = nullptr;
    long v = std::strtol(begin, &end, 10);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
      throw io_error(path + ": cannot parse '" + line + "' as an integer at row " +
                     std::to_string(values.size()));
    }
    values.push_back(v);
  }
  if (values.empty()) throw io_error(path + ": file holds no data rows");
  return values;
}

inline void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

inline void write_int_column(const std::string& path, const std::vector<long>& values) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  for (long v : values) out << v << '\n';
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace mhlr::csv
