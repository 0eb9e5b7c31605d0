#pragma once

#include <cstdio>
#include <string>

namespace mfgz {

/// Round-trip decimal form used in every data file.
inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace mfgz
