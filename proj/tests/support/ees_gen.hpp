#pragma once

// Seeded generators for valid EES/analytics messages; shared by the codec
// property tests and the acceptance round-trip suite.

#include <random>
#include <string>

#include "cloop/ees/codec.hpp"
#include "cloop/nwdaf/types.hpp"
#include "cloop/util/ipv4.hpp"

namespace cloop::testgen {

using Rng = std::mt19937_64;

inline uint64_t pick(Rng& rng, uint64_t lo, uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

inline std::string random_ip(Rng& rng) {
  return util::format_ipv4(static_cast<uint32_t>(rng()));
}

inline util::SysTime random_time(Rng& rng) {
  // 2020..2035, millisecond precision
  return util::from_unix_ms(static_cast<int64_t>(pick(rng, 1577836800000ULL, 2051222400000ULL)));
}

inline ees::SnssaiId random_snssai(Rng& rng) {
  static const char* hex = "0123456789abcdef";
  ees::SnssaiId s;
  s.sst = static_cast<int>(pick(rng, 0, 255));
  s.sd.clear();
  for (int i = 0; i < 6; ++i) s.sd.push_back(hex[pick(rng, 0, 15)]);
  return s;
}

inline ees::FlowKey random_flow(Rng& rng) {
  ees::FlowKey f;
  f.srcIp = random_ip(rng);
  f.dstIp = random_ip(rng);
  f.srcPort = static_cast<uint16_t>(pick(rng, 1, 65535));
  f.dstPort = static_cast<uint16_t>(pick(rng, 1, 65535));
  const uint64_t d = pick(rng, 0, 2);
  f.direction = d == 0 ? ees::FlowDirection::Uplink
                       : d == 1 ? ees::FlowDirection::Downlink : ees::FlowDirection::Bidirectional;
  return f;
}

inline ees::VolumeMeasurement random_volume(Rng& rng) {
  ees::VolumeMeasurement v;
  v.ulVolume = pick(rng, 0, 1ULL << 40);
  v.dlVolume = pick(rng, 0, 1ULL << 40);
  v.totalVolume = v.ulVolume + v.dlVolume;
  v.ulNbOfPackets = pick(rng, 0, 1ULL << 20);
  v.dlNbOfPackets = pick(rng, 0, 1ULL << 20);
  v.totalNbOfPackets = v.ulNbOfPackets + v.dlNbOfPackets;
  return v;
}

inline double random_rate(Rng& rng) {
  return static_cast<double>(pick(rng, 0, 1000000)) / 8.0;
}

inline ees::ThroughputMeasurement random_throughput(Rng& rng) {
  return ees::ThroughputMeasurement{random_rate(rng), random_rate(rng)};
}

inline ees::ThroughputStatisticsMeasurement random_throughput_stats(Rng& rng) {
  ees::ThroughputStatisticsMeasurement t;
  t.ulAverage = random_rate(rng);
  t.ulPeak = t.ulAverage + random_rate(rng);
  t.dlAverage = random_rate(rng);
  t.dlPeak = t.dlAverage + random_rate(rng);
  return t;
}

inline ees::UsageMeasurementItem random_item(Rng& rng) {
  ees::UsageMeasurementItem item;
  if (pick(rng, 0, 1)) {
    item.flowInfo = ees::FlowInfo{ees::make_pack_filt_id(random_flow(rng)),
                                  pick(rng, 0, 1) ? ees::FlowDirection::Bidirectional
                                                  : ees::FlowDirection::Uplink};
  }
  // at least one measurement, any combination
  const uint64_t mask = pick(rng, 1, 7);
  if (mask & 1) item.volumeMeasurement = random_volume(rng);
  if (mask & 2) item.throughputMeasurement = random_throughput(rng);
  if (mask & 4) item.throughputStatisticsMeasurement = random_throughput_stats(rng);
  return item;
}

inline ees::Notification random_notification(Rng& rng) {
  ees::Notification n;
  n.subscriptionId = "sub-" + std::to_string(pick(rng, 1, 100000));
  n.eventType = pick(rng, 0, 1) ? ees::EventType::UserDataUsageMeasures
                                : ees::EventType::UserDataUsageTrends;
  n.ueIpv4Addr = random_ip(rng);
  n.snssai = random_snssai(rng);
  n.startTime = random_time(rng);
  n.timeStamp = n.startTime + std::chrono::milliseconds(pick(rng, 0, 3600000));
  const uint64_t items = pick(rng, 0, 4);
  for (uint64_t i = 0; i < items; ++i) n.userDataUsageMeasurements.push_back(random_item(rng));
  return n;
}

inline ees::ReportingMode random_reporting(Rng& rng) {
  ees::ReportingMode m;
  m.periodSeconds = static_cast<uint32_t>(pick(rng, 1, 3600));
  if (pick(rng, 0, 1)) m.maxReports = static_cast<uint32_t>(pick(rng, 1, 1000));
  if (pick(rng, 0, 1)) m.expiry = random_time(rng);
  return m;
}

inline ees::SubscriptionRequest random_request(Rng& rng) {
  ees::SubscriptionRequest r;
  const uint64_t evs = pick(rng, 1, 3);
  if (evs & 1) r.eventTypes.insert(ees::EventType::UserDataUsageMeasures);
  if (evs & 2) r.eventTypes.insert(ees::EventType::UserDataUsageTrends);
  const uint64_t ms = pick(rng, 0, 3);
  if (ms & 1) r.measurementTypes.insert(ees::MeasurementType::Volume);
  if (ms & 2) r.measurementTypes.insert(ees::MeasurementType::Throughput);
  r.granularity = pick(rng, 0, 1) ? ees::Granularity::PerFlow : ees::Granularity::PerSession;
  r.reporting = random_reporting(rng);
  r.notifyUri = "http://" + random_ip(rng) + ":" + std::to_string(pick(rng, 1, 65535)) + "/notify";
  if (pick(rng, 0, 1)) {
    ees::SubscriptionFilters f;
    if (pick(rng, 0, 1)) f.dnn = "internet";
    if (pick(rng, 0, 1)) f.snssai = random_snssai(rng);
    if (pick(rng, 0, 1)) f.ueIpv4Addr = random_ip(rng);
    r.filters = f;
  }
  return r;
}

inline ees::SubscriptionResponse random_response(Rng& rng) {
  return ees::SubscriptionResponse{"sub-" + std::to_string(pick(rng, 1, 100000)),
                                   random_request(rng)};
}

inline nwdaf::AnalyticsSubscription random_analytics_subscription(Rng& rng) {
  nwdaf::AnalyticsSubscription s;
  s.subscriptionId = "asub-" + std::to_string(pick(rng, 1, 100000));
  s.eventId = nwdaf::AnalyticsEventId::AbnormalBehaviour;
  if (pick(rng, 0, 1)) {
    std::set<nwdaf::ExceptionId> ids;
    if (pick(rng, 0, 1)) ids.insert(nwdaf::ExceptionId::SuspicionOfDdosAttack);
    if (pick(rng, 0, 1)) ids.insert(nwdaf::ExceptionId::TooFrequentServiceAccess);
    if (ids.empty()) ids.insert(nwdaf::ExceptionId::UnexpectedUeLocation);
    s.exceptionIds = ids;
  }
  s.notifyUri = "http://127.0.0.1:" + std::to_string(pick(rng, 1024, 65535)) + "/smf/notify";
  s.periodSeconds = static_cast<uint32_t>(pick(rng, 1, 10));
  return s;
}

inline nwdaf::AbnormalBehaviourNotification random_abnormal_notification(Rng& rng) {
  nwdaf::AbnormalBehaviourNotification n;
  n.subscriptionId = "asub-" + std::to_string(pick(rng, 1, 100000));
  n.timeStamp = random_time(rng);
  const uint64_t count = pick(rng, 0, 3);
  for (uint64_t i = 0; i < count; ++i) {
    nwdaf::ExceptionItem item;
    item.excepId = static_cast<nwdaf::ExceptionId>(pick(rng, 0, 3));
    const uint64_t ues = pick(rng, 1, 3);
    for (uint64_t u = 0; u < ues; ++u) item.ueIpv4Addrs.push_back(random_ip(rng));
    if (pick(rng, 0, 1)) item.pduSessionIds.push_back(static_cast<int64_t>(pick(rng, 1, 100)));
    item.confidence = static_cast<double>(pick(rng, 0, 1000)) / 1000.0;
    n.exceptions.push_back(std::move(item));
  }
  return n;
}

}  // namespace cloop::testgen
