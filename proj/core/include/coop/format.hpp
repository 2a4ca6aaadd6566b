#pragma once

#include <cstdio>
#include <string>

namespace coop {

/// Shortest-stable text form used in every CSV: 17 significant digits.
inline std::string format_real(double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace coop
