#pragma once

#include <string>

#include "mfgz/config.hpp"

namespace mfgz::test {

// Minimal one-dimensional game text; callers override keys by appending lines.
inline GameConfig config_of(const std::string& body) {
  return parse_config(body, "test");
}

inline std::string game1d(const std::string& f, const std::string& l, const std::string& m,
                          const std::string& x_law = "dirac 0", const std::string& extra = "") {
  return "dim = 1\nf = " + f + "\nl = " + l + "\nm = " + m + "\nU = 0 1\nV = 0 1\nx_law = " + x_law +
         "\nz_law = dirac 0\n" + extra;
}

}  // namespace mfgz::test
