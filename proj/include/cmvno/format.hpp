#pragma once

#include <cstdio>
#include <string>

namespace cmvno {

/// Numbers in every CLI artifact carry 12 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Rounds to the value that format_number would print.
inline double round_12(double v) { return std::stod(format_number(v)); }

}  // namespace cmvno
