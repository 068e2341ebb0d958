#pragma once

#include <cstdio>
#include <string>

namespace nclheat {

/// 17 significant digits: round-trips every double exactly.
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace nclheat
