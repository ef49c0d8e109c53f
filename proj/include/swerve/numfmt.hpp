#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "swerve/errors.hpp"

namespace swerve::detail {

/// Locale-independent float formatting at 9 significant digits (printf %.9g
/// semantics), the serialization precision used everywhere.
inline std::string format_g9(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

/// Locale-independent parse of a whole token; throws on trailing junk.
inline double parse_double(std::string_view token, const std::string& what) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw InputError("cannot parse number '" + std::string(token) + "' in " + what);
  return value;
}

inline long parse_long(std::string_view token, const std::string& what) {
  long value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw InputError("cannot parse integer '" + std::string(token) + "' in " + what);
  return value;
}

}  // namespace swerve::detail
