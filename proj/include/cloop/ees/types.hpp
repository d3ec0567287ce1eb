#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloop/util/time.hpp"

namespace cloop::ees {

// Closed-world enumerations: only the tokens below exist on the wire, any
// other token is a decode error, never a coercion.

enum class EventType { UserDataUsageMeasures, UserDataUsageTrends };
enum class MeasurementType { Volume, Throughput };
enum class Granularity { PerFlow, PerSession };
enum class FlowDirection { Uplink, Downlink, Bidirectional };

const char* to_token(EventType v);
const char* to_token(MeasurementType v);
const char* to_token(Granularity v);
const char* to_token(FlowDirection v);
std::optional<EventType> event_type_from_token(const std::string& s);
std::optional<MeasurementType> measurement_type_from_token(const std::string& s);
std::optional<Granularity> granularity_from_token(const std::string& s);
std::optional<FlowDirection> flow_direction_from_token(const std::string& s);

/// S-NSSAI. `sd` is kept normalized to six hex digits; five-digit values seen
/// on the wire are zero-padded on decode.
struct SnssaiId {
  int sst = 0;            // 0..255
  std::string sd = "000000";

  bool operator==(const SnssaiId&) const = default;
  auto operator<=>(const SnssaiId&) const = default;
};

bool valid_snssai_sd(const std::string& sd);

struct FlowKey {
  std::string srcIp;
  std::string dstIp;
  uint16_t srcPort = 0;
  uint16_t dstPort = 0;
  FlowDirection direction = FlowDirection::Bidirectional;

  bool operator==(const FlowKey&) const = default;
  auto operator<=>(const FlowKey&) const = default;

  /// Canonical form: endpoints ordered so a flow and its reverse map to the
  /// same key when direction is BIDIRECTIONAL. Directional keys are returned
  /// unchanged.
  FlowKey normalized() const;

  /// Canonical form with the UE-side endpoint first (UPF convention).
  FlowKey normalized_for_ue(const std::string& ueIp) const;

  FlowKey reversed() const;
};

struct ReportingMode {
  uint32_t periodSeconds = 1;  // >= 1
  std::optional<uint32_t> maxReports;
  std::optional<util::SysTime> expiry;

  bool operator==(const ReportingMode&) const = default;
};

struct SubscriptionFilters {
  std::optional<std::string> dnn;
  std::optional<SnssaiId> snssai;
  std::optional<std::string> ueIpv4Addr;

  bool operator==(const SubscriptionFilters&) const = default;
  bool empty() const { return !dnn && !snssai && !ueIpv4Addr; }
};

struct SubscriptionRequest {
  std::set<EventType> eventTypes;  // non-empty
  std::set<MeasurementType> measurementTypes;
  Granularity granularity = Granularity::PerFlow;
  ReportingMode reporting;
  std::string notifyUri;  // absolute http URI
  std::optional<SubscriptionFilters> filters;

  bool operator==(const SubscriptionRequest&) const = default;
};

struct SubscriptionResponse {
  std::string subscriptionId;
  SubscriptionRequest accepted;

  bool operator==(const SubscriptionResponse&) const = default;
};

struct VolumeMeasurement {
  uint64_t totalVolume = 0;
  uint64_t ulVolume = 0;
  uint64_t dlVolume = 0;
  uint64_t totalNbOfPackets = 0;
  uint64_t ulNbOfPackets = 0;
  uint64_t dlNbOfPackets = 0;

  bool operator==(const VolumeMeasurement&) const = default;
};

struct ThroughputMeasurement {
  double ulThroughput = 0;  // bytes/second
  double dlThroughput = 0;

  bool operator==(const ThroughputMeasurement&) const = default;
};

struct ThroughputStatisticsMeasurement {
  double ulAverage = 0;
  double ulPeak = 0;
  double dlAverage = 0;
  double dlPeak = 0;

  bool operator==(const ThroughputStatisticsMeasurement&) const = default;
};

struct FlowInfo {
  std::string packFiltId;  // opaque; content is the JSON-escaped flow description
  FlowDirection fDir = FlowDirection::Bidirectional;

  bool operator==(const FlowInfo&) const = default;
};

struct UsageMeasurementItem {
  std::optional<FlowInfo> flowInfo;
  std::optional<VolumeMeasurement> volumeMeasurement;
  std::optional<ThroughputMeasurement> throughputMeasurement;
  std::optional<ThroughputStatisticsMeasurement> throughputStatisticsMeasurement;

  bool operator==(const UsageMeasurementItem&) const = default;
};

struct Notification {
  std::string subscriptionId;
  EventType eventType = EventType::UserDataUsageMeasures;
  std::string ueIpv4Addr;
  SnssaiId snssai;
  util::SysTime timeStamp{};
  util::SysTime startTime{};
  std::vector<UsageMeasurementItem> userDataUsageMeasurements;

  bool operator==(const Notification&) const = default;
};

}  // namespace cloop::ees
