#pragma once

#include <array>
#include <charconv>
#include <string>

namespace robcov {

/// Shortest decimal that round-trips to the same double; '.' separator, locale independent.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

}  // namespace robcov
