#pragma once

// Formatting and parsing helpers for the CSV/JSON surfaces. All doubles are
// written with %.17g so files round-trip losslessly and rewrites are
// byte-identical run to run.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "gyrocompass/error.hpp"

namespace gyro {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& path, long line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw parse_error(path, line, "expected a number, got '" + text + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace gyro
