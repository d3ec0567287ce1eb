#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "cloop/util/time.hpp"

namespace cloop::util {

/// One timestamped cross-service event. `fields` holds a serialized JSON
/// object so the log stays decoupled from any particular json type on hot
/// paths; use nlohmann::json(...).dump() at call sites.
struct Event {
  SysTime at;
  std::string service;
  std::string kind;
  std::string fields;  // JSON object text, "{}" when empty
};

/// Single serialized sink with monotone timestamps, dumpable as JSONL.
class EventLog {
 public:
  void append(const std::string& service, const std::string& kind, std::string fields = "{}");
  std::vector<Event> snapshot() const;
  size_t size() const;
  void clear();

  void write_jsonl(const std::string& path) const;
  static std::vector<Event> read_jsonl(const std::string& path);

 private:
  mutable std::mutex mutex_;
  std::vector<Event> events_;
  SysTime last_{};
};

}  // namespace cloop::util
