#include "cloop/util/eventlog.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cloop::util {

using nlohmann::json;

void EventLog::append(const std::string& service, const std::string& kind, std::string fields) {
  std::lock_guard<std::mutex> lk(mutex_);
  SysTime now = now_sys();
  if (now <= last_) now = last_ + std::chrono::microseconds(1);  // keep timestamps monotone
  last_ = now;
  events_.push_back(Event{now, service, kind, std::move(fields)});
}

std::vector<Event> EventLog::snapshot() const {
  std::lock_guard<std::mutex> lk(mutex_);
  return events_;
}

size_t EventLog::size() const {
  std::lock_guard<std::mutex> lk(mutex_);
  return events_.size();
}

void EventLog::clear() {
  std::lock_guard<std::mutex> lk(mutex_);
  events_.clear();
}

void EventLog::write_jsonl(const std::string& path) const {
  std::vector<Event> copy = snapshot();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const Event& e : copy) {
    json line{{"ts", format_rfc3339(e.at)}, {"service", e.service}, {"kind", e.kind}};
    line["fields"] = json::parse(e.fields);
    out << line.dump() << "\n";
  }
}

std::vector<Event> EventLog::read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Event> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    out.push_back(Event{parse_rfc3339(j.at("ts").get<std::string>()),
                        j.at("service").get<std::string>(), j.at("kind").get<std::string>(),
                        j.value("fields", json::object()).dump()});
  }
  return out;
}

}  // namespace cloop::util
