#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cloop::util {

/// Dotted-quad parse, strict: four decimal octets, no leading garbage.
std::optional<uint32_t> parse_ipv4(std::string_view s);
std::string format_ipv4(uint32_t addr);

inline bool is_ipv4(std::string_view s) { return parse_ipv4(s).has_value(); }

}  // namespace cloop::util
