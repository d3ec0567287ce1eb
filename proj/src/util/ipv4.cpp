#include "cloop/util/ipv4.hpp"

#include <cstdio>

namespace cloop::util {

std::optional<uint32_t> parse_ipv4(std::string_view s) {
  uint32_t addr = 0;
  int digits = 0;
  int parts = 0;
  long cur = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      if (digits == 0 || cur > 255) return std::nullopt;
      addr = (addr << 8) | static_cast<uint32_t>(cur);
      ++parts;
      cur = 0;
      digits = 0;
      if (i == s.size()) break;
      if (parts == 4) return std::nullopt;  // trailing dot or 5th part
    } else if (s[i] >= '0' && s[i] <= '9') {
      cur = cur * 10 + (s[i] - '0');
      if (++digits > 3) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  if (parts != 4) return std::nullopt;
  return addr;
}

std::string format_ipv4(uint32_t addr) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (addr >> 24) & 0xff, (addr >> 16) & 0xff,
                (addr >> 8) & 0xff, addr & 0xff);
  return buf;
}

}  // namespace cloop::util
