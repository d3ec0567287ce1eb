#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloop/nwdaf/types.hpp"

namespace cloop::nwdaf {

/// Append-only usage-report store: JSONL file with fsync before every
/// acknowledgement plus an in-memory copy for querying. Reports acknowledged
/// before a crash are returned again after reopening the same path.
/// Duplicate deliveries (same subscriptionId + timeStamp) are dropped.
class ReportStore {
 public:
  explicit ReportStore(std::filesystem::path path);
  ~ReportStore();

  ReportStore(const ReportStore&) = delete;
  ReportStore& operator=(const ReportStore&) = delete;

  /// Durable append; false when the dedup key was already stored.
  bool append(const StoredUsageReport& report);

  /// Reports with notification timeStamp in [start, end], optionally
  /// restricted to one UE, ordered by timeStamp.
  std::vector<StoredUsageReport> query(util::SysTime start, util::SysTime end,
                                       const std::optional<std::string>& ueFilter = {}) const;

  size_t size() const;
  std::optional<util::SysTime> earliest_timestamp() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<StoredUsageReport> reports_;
  std::set<std::pair<std::string, int64_t>> seen_;  // (subscriptionId, timeStamp ms)
  int fd_ = -1;
};

}  // namespace cloop::nwdaf
