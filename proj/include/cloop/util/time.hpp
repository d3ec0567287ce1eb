#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace cloop::util {

using SysTime = std::chrono::system_clock::time_point;
using SteadyTime = std::chrono::steady_clock::time_point;

inline SysTime now_sys() { return std::chrono::system_clock::now(); }
inline SteadyTime now_steady() { return std::chrono::steady_clock::now(); }

inline int64_t to_unix_ms(SysTime t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}
inline SysTime from_unix_ms(int64_t ms) {
  return SysTime(std::chrono::milliseconds(ms));
}
inline int64_t steady_ns(SteadyTime t) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

/// RFC 3339 UTC timestamp with trailing "Z". Millisecond precision;
/// fractional part omitted when zero (matches the wire samples).
std::string format_rfc3339(SysTime t);

/// Parses an RFC 3339 UTC timestamp ("Z" or "+00:00" offset). Fractional
/// seconds beyond milliseconds are truncated. Throws std::invalid_argument.
SysTime parse_rfc3339(const std::string& s);

/// Seconds as a double between two wall-clock points.
inline double seconds_between(SysTime from, SysTime to) {
  return std::chrono::duration<double>(to - from).count();
}

}  // namespace cloop::util
