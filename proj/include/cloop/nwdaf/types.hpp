#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloop/ees/types.hpp"
#include "cloop/util/time.hpp"

namespace cloop::nwdaf {

struct StoredUsageReport {
  util::SysTime receivedAt{};
  ees::Notification notification;
  std::string sourceUpf;

  bool operator==(const StoredUsageReport&) const = default;
};

enum class AnalyticsEventId { AbnormalBehaviour };

enum class ExceptionId {
  SuspicionOfDdosAttack,
  TooFrequentServiceAccess,
  UnexpectedUeLocation,
  UnexpectedRadioLinkFailures,
};

const char* to_token(AnalyticsEventId v);
const char* to_token(ExceptionId v);
std::optional<AnalyticsEventId> analytics_event_from_token(const std::string& s);
std::optional<ExceptionId> exception_from_token(const std::string& s);

struct AnalyticsSubscription {
  std::string subscriptionId;
  AnalyticsEventId eventId = AnalyticsEventId::AbnormalBehaviour;
  std::optional<std::set<ExceptionId>> exceptionIds;
  std::string notifyUri;
  uint32_t periodSeconds = 1;

  bool operator==(const AnalyticsSubscription&) const = default;
};

struct ExceptionItem {
  ExceptionId excepId = ExceptionId::SuspicionOfDdosAttack;
  std::vector<std::string> ueIpv4Addrs;
  std::vector<int64_t> pduSessionIds;
  double confidence = 0.0;  // 0..1

  bool operator==(const ExceptionItem&) const = default;
};

struct AbnormalBehaviourNotification {
  std::string subscriptionId;
  util::SysTime timeStamp{};
  std::vector<ExceptionItem> exceptions;  // empty = negative report

  bool operator==(const AbnormalBehaviourNotification&) const = default;
};

/// Per-UE verdict from an analytics engine run.
struct DetectionResult {
  std::string ueIpv4Addr;
  bool anomalous = false;
  double confidence = 0.0;
  ExceptionId excepId = ExceptionId::SuspicionOfDdosAttack;
  util::SysTime windowStart{};
  util::SysTime windowEnd{};
};

// Wire codecs for the analytics messages; same strictness rules as the EES
// codec (closed-world enums, unknown fields ignored).
AnalyticsSubscription decode_analytics_subscription(std::string_view raw);
std::string encode_analytics_subscription(const AnalyticsSubscription& s);
AbnormalBehaviourNotification decode_abnormal_notification(std::string_view raw);
std::string encode_abnormal_notification(const AbnormalBehaviourNotification& n);

}  // namespace cloop::nwdaf
