#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace gricp::detail {

/// Shortest text that parses back to exactly the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed 17 significant digits.
inline std::string digits17(double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace gricp::detail
