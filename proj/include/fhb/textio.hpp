#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "fhb/errors.hpp"

namespace fhb {

// Formats a double with the given number of significant digits ("%.Ng").
// 9 digits round-trip float32-quantized data; 17 round-trip any double.
inline std::string format_sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

inline std::string format_g9(double value) { return format_sig(value, 9); }
inline std::string format_g17(double value) { return format_sig(value, 17); }

// Strict string-to-double conversion: the whole token must be consumed.
// Returns false on empty input, trailing garbage, or out-of-range values.
inline bool try_parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + token.size();
}

// Splits one CSV line on commas. No quoting; empty cells are preserved.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace fhb
