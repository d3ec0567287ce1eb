#include "cloop/util/uri.hpp"

#include <charconv>

namespace cloop::util {

std::optional<HttpUri> parse_http_uri(std::string_view uri) {
  constexpr std::string_view scheme = "http://";
  if (uri.substr(0, scheme.size()) != scheme) return std::nullopt;
  std::string_view rest = uri.substr(scheme.size());
  const size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (authority.empty()) return std::nullopt;

  HttpUri out;
  const size_t colon = authority.rfind(':');
  if (colon == std::string_view::npos) {
    out.host = std::string(authority);
  } else {
    out.host = std::string(authority.substr(0, colon));
    std::string_view portsv = authority.substr(colon + 1);
    int port = 0;
    auto [p, ec] = std::from_chars(portsv.data(), portsv.data() + portsv.size(), port);
    if (ec != std::errc() || p != portsv.data() + portsv.size() || port < 1 || port > 65535) {
      return std::nullopt;
    }
    out.port = port;
  }
  if (out.host.empty()) return std::nullopt;
  out.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  return out;
}

}  // namespace cloop::util
