// Minimal CSV reading/writing for the numeric tables this toolkit exchanges.
#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cyberseer/common.hpp"

namespace cyberseer::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<double> column_values(const std::string& name) const {
    int idx = column(name);
    if (idx < 0) fail(ErrorKind::invalid_input, "no such column: " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<size_t>(idx)]);
    return out;
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_number(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    fail(ErrorKind::malformed_csv, "bad numeric field '" + s + "' at " + where);
  return v;
}

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::malformed_csv, "empty file: " + path);
  t.header = split_line(line);
  size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != t.header.size())
      fail(ErrorKind::malformed_csv,
           path + ":" + std::to_string(row_no) + " expected " + std::to_string(t.header.size()) +
               " fields, got " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (size_t i = 0; i < fields.size(); ++i)
      row.push_back(parse_number(fields[i], path + ":" + std::to_string(row_no)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace cyberseer::csv
