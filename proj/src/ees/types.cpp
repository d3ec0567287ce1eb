#include "cloop/ees/types.hpp"

#include <cctype>
#include <tuple>

namespace cloop::ees {

const char* to_token(EventType v) {
  switch (v) {
    case EventType::UserDataUsageMeasures: return "USER_DATA_USAGE_MEASURES";
    case EventType::UserDataUsageTrends: return "USER_DATA_USAGE_TRENDS";
  }
  return "?";
}

const char* to_token(MeasurementType v) {
  switch (v) {
    case MeasurementType::Volume: return "VOLUME_MEASUREMENT";
    case MeasurementType::Throughput: return "THROUGHPUT_MEASUREMENT";
  }
  return "?";
}

const char* to_token(Granularity v) {
  switch (v) {
    case Granularity::PerFlow: return "PER_FLOW";
    case Granularity::PerSession: return "PER_SESSION";
  }
  return "?";
}

const char* to_token(FlowDirection v) {
  switch (v) {
    case FlowDirection::Uplink: return "UPLINK";
    case FlowDirection::Downlink: return "DOWNLINK";
    case FlowDirection::Bidirectional: return "BIDIRECTIONAL";
  }
  return "?";
}

std::optional<EventType> event_type_from_token(const std::string& s) {
  if (s == "USER_DATA_USAGE_MEASURES") return EventType::UserDataUsageMeasures;
  if (s == "USER_DATA_USAGE_TRENDS") return EventType::UserDataUsageTrends;
  return std::nullopt;
}

std::optional<MeasurementType> measurement_type_from_token(const std::string& s) {
  if (s == "VOLUME_MEASUREMENT") return MeasurementType::Volume;
  if (s == "THROUGHPUT_MEASUREMENT") return MeasurementType::Throughput;
  return std::nullopt;
}

std::optional<Granularity> granularity_from_token(const std::string& s) {
  if (s == "PER_FLOW") return Granularity::PerFlow;
  if (s == "PER_SESSION") return Granularity::PerSession;
  return std::nullopt;
}

std::optional<FlowDirection> flow_direction_from_token(const std::string& s) {
  if (s == "UPLINK") return FlowDirection::Uplink;
  if (s == "DOWNLINK") return FlowDirection::Downlink;
  if (s == "BIDIRECTIONAL") return FlowDirection::Bidirectional;
  return std::nullopt;
}

bool valid_snssai_sd(const std::string& sd) {
  if (sd.size() != 6) return false;
  for (char c : sd) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

FlowKey FlowKey::reversed() const {
  FlowKey r = *this;
  std::swap(r.srcIp, r.dstIp);
  std::swap(r.srcPort, r.dstPort);
  if (direction == FlowDirection::Uplink) r.direction = FlowDirection::Downlink;
  else if (direction == FlowDirection::Downlink) r.direction = FlowDirection::Uplink;
  return r;
}

FlowKey FlowKey::normalized() const {
  if (direction != FlowDirection::Bidirectional) return *this;
  if (std::tie(srcIp, srcPort) <= std::tie(dstIp, dstPort)) return *this;
  FlowKey r = reversed();
  r.direction = FlowDirection::Bidirectional;
  return r;
}

FlowKey FlowKey::normalized_for_ue(const std::string& ueIp) const {
  FlowKey r = *this;
  r.direction = FlowDirection::Bidirectional;
  if (dstIp == ueIp && srcIp != ueIp) {
    std::swap(r.srcIp, r.dstIp);
    std::swap(r.srcPort, r.dstPort);
  }
  return r;
}

}  // namespace cloop::ees
