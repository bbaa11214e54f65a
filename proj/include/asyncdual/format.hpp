#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace asyncdual {

/// Shortest decimal that round-trips to the same double. inf/nan spelled out.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace asyncdual
