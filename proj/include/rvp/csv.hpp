#pragma once

#include <cstdio>
#include <string>

namespace rvp {

// 17 significant digits round-trips a double exactly; every CSV number goes
// through this one formatter so reruns are byte identical.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace rvp
