#include "cloop/nwdaf/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/log.hpp"

namespace cloop::nwdaf {

using nlohmann::json;

ReportStore::ReportStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    size_t lineNo = 0;
    while (in && std::getline(in, line)) {
      ++lineNo;
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        StoredUsageReport r;
        r.receivedAt = util::parse_rfc3339(j.at("receivedAt").get<std::string>());
        r.sourceUpf = j.at("sourceUpf").get<std::string>();
        r.notification = ees::decode_notification(j.at("notification").dump());
        seen_.emplace(r.notification.subscriptionId, util::to_unix_ms(r.notification.timeStamp));
        reports_.push_back(std::move(r));
      } catch (const std::exception& e) {
        util::log_warn("nwdaf", "skipping corrupt store line " + std::to_string(lineNo) + ": " +
                                    e.what());
      }
    }
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd_ < 0) throw std::runtime_error("cannot open report store " + path_.string());
}

ReportStore::~ReportStore() {
  if (fd_ >= 0) ::close(fd_);
}

bool ReportStore::append(const StoredUsageReport& report) {
  std::lock_guard lk(mutex_);
  const auto key = std::make_pair(report.notification.subscriptionId,
                                  util::to_unix_ms(report.notification.timeStamp));
  if (!seen_.insert(key).second) return false;

  json line{{"receivedAt", util::format_rfc3339(report.receivedAt)},
            {"sourceUpf", report.sourceUpf},
            {"notification", json::parse(ees::encode_notification(report.notification))}};
  std::string text = line.dump();
  text.push_back('\n');
  size_t off = 0;
  while (off < text.size()) {
    const ssize_t n = ::write(fd_, text.data() + off, text.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      seen_.erase(key);
      throw std::runtime_error("report store write failed");
    }
    off += static_cast<size_t>(n);
  }
  ::fsync(fd_);  // durable before the caller acknowledges
  reports_.push_back(report);
  return true;
}

std::vector<StoredUsageReport> ReportStore::query(util::SysTime start, util::SysTime end,
                                                  const std::optional<std::string>& ueFilter) const {
  std::lock_guard lk(mutex_);
  std::vector<StoredUsageReport> out;
  for (const StoredUsageReport& r : reports_) {
    const util::SysTime ts = r.notification.timeStamp;
    if (ts < start || ts > end) continue;
    if (ueFilter && r.notification.ueIpv4Addr != *ueFilter) continue;
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StoredUsageReport& a, const StoredUsageReport& b) {
                     return a.notification.timeStamp < b.notification.timeStamp;
                   });
  return out;
}

size_t ReportStore::size() const {
  std::lock_guard lk(mutex_);
  return reports_.size();
}

std::optional<util::SysTime> ReportStore::earliest_timestamp() const {
  std::lock_guard lk(mutex_);
  std::optional<util::SysTime> out;
  for (const StoredUsageReport& r : reports_) {
    if (!out || r.notification.timeStamp < *out) out = r.notification.timeStamp;
  }
  return out;
}

}  // namespace cloop::nwdaf
