#pragma once

// C99 "%a" hexadecimal float text, the format used for residual traces.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "reprocg/errors.hpp"

namespace reprocg {

/// e.g. 0x1.19f179eb7f032p+49; exact for every binary64 value.
[[nodiscard]] inline std::string format_hex(double x) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%a", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

[[nodiscard]] inline double parse_hex(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw parse_error("not a floating-point literal: '" + s + "'", 0);
  return v;
}

}  // namespace reprocg
