#include "cloop/util/time.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace cloop::util {

std::string format_rfc3339(SysTime t) {
  const int64_t ms_total = to_unix_ms(t);
  // floor-divide so pre-epoch times still format correctly
  int64_t secs = ms_total / 1000;
  int64_t ms = ms_total % 1000;
  if (ms < 0) {
    ms += 1000;
    secs -= 1;
  }
  std::tm tm{};
  const time_t tt = static_cast<time_t>(secs);
  gmtime_r(&tt, &tm);
  char buf[96];
  if (ms == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms));
  }
  return buf;
}

SysTime parse_rfc3339(const std::string& s) {
  int year, mon, day, hour, min, sec;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &year, &mon, &day, &hour, &min, &sec,
                  &consumed) != 6 ||
      consumed != 19) {
    throw std::invalid_argument("bad RFC 3339 timestamp: " + s);
  }
  size_t pos = 19;
  int64_t ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    size_t digits = 0;
    int64_t frac = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) frac = frac * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw std::invalid_argument("bad fractional seconds: " + s);
    while (digits < 3) {
      frac *= 10;
      ++digits;
    }
    ms = frac;
  }
  // only UTC designators are accepted; this artifact never emits offsets
  std::string tz = s.substr(pos);
  if (tz != "Z" && tz != "z" && tz != "+00:00" && tz != "-00:00") {
    throw std::invalid_argument("expected UTC timestamp: " + s);
  }
  if (mon < 1 || mon > 12 || day < 1 || day > 31 || hour > 23 || min > 59 || sec > 60) {
    throw std::invalid_argument("timestamp field out of range: " + s);
  }
  // nanosecond-tick time_points overflow past ~2262
  if (year < 1970 || year > 2260) {
    throw std::invalid_argument("timestamp year out of supported range: " + s);
  }
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = mon - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = min;
  tm.tm_sec = sec;
  const time_t secs = timegm(&tm);
  return from_unix_ms(static_cast<int64_t>(secs) * 1000 + ms);
}

}  // namespace cloop::util
