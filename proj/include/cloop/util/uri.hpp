#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cloop::util {

struct HttpUri {
  std::string host;
  int port = 80;
  std::string path;  // includes leading '/', "/" when absent

  std::string base() const { return "http://" + host + ":" + std::to_string(port); }
};

/// Accepts absolute http:// URIs only (https is out of scope for this artifact).
std::optional<HttpUri> parse_http_uri(std::string_view uri);

}  // namespace cloop::util
