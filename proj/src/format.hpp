#pragma once

#include <charconv>
#include <string>

namespace twd::fmt {

// Shortest round-trip text, '.' decimal point whatever the locale.
inline std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace twd::fmt
