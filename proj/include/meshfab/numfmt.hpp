#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace meshfab {

// Shortest decimal form that parses back to the identical value, so text
// round-trips are exact and 1.1f prints as "1.1" rather than "1.10000002".
inline std::string format_f32(float v) {
  char buf[48];
  for (int prec = 1; prec <= 9; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, static_cast<double>(v));
    if (std::strtof(buf, nullptr) == v) return buf;
  }
  return buf;
}

inline std::string format_f64(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace meshfab
