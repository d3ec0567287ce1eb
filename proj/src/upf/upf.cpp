#include "cloop/upf/upf.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/ipv4.hpp"

namespace cloop::upf {

using ees::CodecError;
using ees::CodecErrorKind;
using nlohmann::json;

const char* to_token(PacketKind v) {
  return v == PacketKind::Data ? "DATA" : "PROBE";
}
const char* to_token(PacketDirection v) {
  return v == PacketDirection::Uplink ? "UPLINK" : "DOWNLINK";
}
std::optional<PacketKind> packet_kind_from_token(const std::string& s) {
  if (s == "DATA") return PacketKind::Data;
  if (s == "PROBE") return PacketKind::Probe;
  return std::nullopt;
}
std::optional<PacketDirection> packet_direction_from_token(const std::string& s) {
  if (s == "UPLINK") return PacketDirection::Uplink;
  if (s == "DOWNLINK") return PacketDirection::Downlink;
  return std::nullopt;
}

void validate(const PacketDescriptor& p) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw CodecError(CodecErrorKind::InvariantViolation, field, why);
  };
  if (p.sizeBytes < 1) bad("sizeBytes", "must be >= 1");
  if (!util::is_ipv4(p.ueIpv4Addr)) bad("ueIpv4Addr", "not IPv4");
  if (!util::is_ipv4(p.flow.srcIp) || !util::is_ipv4(p.flow.dstIp)) bad("flow", "not IPv4");
  if (p.direction == PacketDirection::Uplink && p.flow.srcIp != p.ueIpv4Addr) {
    bad("flow.srcIp", "uplink packets originate at the UE address");
  }
  if (p.direction == PacketDirection::Downlink && p.flow.dstIp != p.ueIpv4Addr) {
    bad("flow.dstIp", "downlink packets terminate at the UE address");
  }
}

PacketDescriptor decode_packet_descriptor(std::string_view raw) {
  json j = json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw CodecError(CodecErrorKind::MalformedJson, "", "not a JSON object");
  }
  auto str = [&](const json& o, const char* name) -> std::string {
    if (!o.contains(name) || !o[name].is_string()) {
      throw CodecError(CodecErrorKind::SchemaViolation, name, "missing string");
    }
    return o[name].get<std::string>();
  };
  auto num = [&](const json& o, const char* name) -> int64_t {
    if (!o.contains(name) || !o[name].is_number_integer()) {
      throw CodecError(CodecErrorKind::SchemaViolation, name, "missing integer");
    }
    return o[name].get<int64_t>();
  };
  PacketDescriptor p;
  if (!j.contains("flow") || !j["flow"].is_object()) {
    throw CodecError(CodecErrorKind::SchemaViolation, "flow", "missing object");
  }
  const json& f = j["flow"];
  p.flow.srcIp = str(f, "srcIp");
  p.flow.dstIp = str(f, "dstIp");
  p.flow.srcPort = static_cast<uint16_t>(num(f, "srcPort"));
  p.flow.dstPort = static_cast<uint16_t>(num(f, "dstPort"));
  auto fdir = ees::flow_direction_from_token(str(f, "direction"));
  if (!fdir) throw CodecError(CodecErrorKind::UnknownEnumToken, "flow.direction", "unknown");
  p.flow.direction = *fdir;
  p.pduSessionId = num(j, "pduSessionId");
  p.ueIpv4Addr = str(j, "ueIpv4Addr");
  const int64_t size = num(j, "sizeBytes");
  if (size < 1 || size > UINT32_MAX) {
    throw CodecError(CodecErrorKind::SchemaViolation, "sizeBytes", "out of range");
  }
  p.sizeBytes = static_cast<uint32_t>(size);
  auto dir = packet_direction_from_token(str(j, "direction"));
  if (!dir) throw CodecError(CodecErrorKind::UnknownEnumToken, "direction", "unknown");
  p.direction = *dir;
  auto kind = packet_kind_from_token(str(j, "kind"));
  if (!kind) throw CodecError(CodecErrorKind::UnknownEnumToken, "kind", "unknown");
  p.kind = *kind;
  if (j.contains("timestampNs") && j["timestampNs"].is_number_integer()) {
    p.timestampNs = j["timestampNs"].get<int64_t>();
  }
  validate(p);
  return p;
}

std::string encode_packet_descriptor(const PacketDescriptor& p) {
  return json{{"flow",
               {{"srcIp", p.flow.srcIp},
                {"dstIp", p.flow.dstIp},
                {"srcPort", p.flow.srcPort},
                {"dstPort", p.flow.dstPort},
                {"direction", ees::to_token(p.flow.direction)}}},
              {"pduSessionId", p.pduSessionId},
              {"ueIpv4Addr", p.ueIpv4Addr},
              {"sizeBytes", p.sizeBytes},
              {"direction", to_token(p.direction)},
              {"kind", to_token(p.kind)},
              {"timestampNs", p.timestampNs}}
      .dump();
}

// ---------------------------------------------------------------------------

namespace {

ees::ThroughputStatisticsMeasurement stats_from_buckets(
    const std::deque<AggregateRecord::SecondBucket>& buckets) {
  ees::ThroughputStatisticsMeasurement out;
  if (buckets.empty()) return out;
  uint64_t ulSum = 0, dlSum = 0, ulPeak = 0, dlPeak = 0;
  for (const auto& b : buckets) {
    ulSum += b.ulBytes;
    dlSum += b.dlBytes;
    ulPeak = std::max(ulPeak, b.ulBytes);
    dlPeak = std::max(dlPeak, b.dlBytes);
  }
  const double n = static_cast<double>(buckets.size());
  out.ulAverage = static_cast<double>(ulSum) / n;
  out.dlAverage = static_cast<double>(dlSum) / n;
  out.ulPeak = static_cast<double>(ulPeak);
  out.dlPeak = static_cast<double>(dlPeak);
  return out;
}

}  // namespace

ees::UsageMeasurementItem compute_measurements(const AggregateRecord& rec, double windowSeconds,
                                               const std::optional<ees::FlowKey>& flowForInfo,
                                               const std::set<ees::MeasurementType>& requested) {
  ees::UsageMeasurementItem item;
  if (flowForInfo) {
    item.flowInfo = ees::FlowInfo{ees::make_pack_filt_id(*flowForInfo), flowForInfo->direction};
  }
  if (requested.count(ees::MeasurementType::Volume)) {
    ees::VolumeMeasurement v;
    v.ulVolume = rec.ulBytes;
    v.dlVolume = rec.dlBytes;
    v.totalVolume = rec.ulBytes + rec.dlBytes;
    v.ulNbOfPackets = rec.ulPackets;
    v.dlNbOfPackets = rec.dlPackets;
    v.totalNbOfPackets = rec.ulPackets + rec.dlPackets;
    item.volumeMeasurement = v;
  }
  if (requested.count(ees::MeasurementType::Throughput)) {
    ees::ThroughputMeasurement t;
    if (windowSeconds > 0) {
      t.ulThroughput = static_cast<double>(rec.ulBytes) / windowSeconds;
      t.dlThroughput = static_cast<double>(rec.dlBytes) / windowSeconds;
    }
    item.throughputMeasurement = t;
    item.throughputStatisticsMeasurement = stats_from_buckets(rec.buckets);
  }
  return item;
}

AggregateRecord sum_records(std::span<const AggregateRecord* const> records) {
  AggregateRecord out;
  std::map<int64_t, AggregateRecord::SecondBucket> merged;
  bool first = true;
  for (const AggregateRecord* r : records) {
    out.ulBytes += r->ulBytes;
    out.dlBytes += r->dlBytes;
    out.ulPackets += r->ulPackets;
    out.dlPackets += r->dlPackets;
    for (const auto& b : r->buckets) {
      auto& m = merged[b.sec];
      m.sec = b.sec;
      m.ulBytes += b.ulBytes;
      m.dlBytes += b.dlBytes;
    }
    if (first || r->firstSeen < out.firstSeen) out.firstSeen = r->firstSeen;
    if (first || out.lastSeen < r->lastSeen) out.lastSeen = r->lastSeen;
    first = false;
  }
  for (const auto& [_, b] : merged) out.buckets.push_back(b);
  return out;
}

// ---------------------------------------------------------------------------

size_t Upf::RecordKeyHash::operator()(const RecordKey& k) const {
  size_t h = std::hash<int64_t>()(k.sessionId);
  auto mix = [&h](size_t v) { h ^= v + 0x9e3779b9 + (h << 6) + (h >> 2); };
  mix(std::hash<std::string>()(k.flow.srcIp));
  mix(std::hash<std::string>()(k.flow.dstIp));
  mix(std::hash<uint32_t>()(static_cast<uint32_t>(k.flow.srcPort) << 16 | k.flow.dstPort));
  mix(std::hash<int>()(static_cast<int>(k.flow.direction)));
  return h;
}

Upf::Upf(UpfOptions options) : options_(std::move(options)) {}

bool Upf::add_session(int64_t id, const std::string& ueIp, const ees::SnssaiId& snssai) {
  std::unique_lock lk(sessionsMutex_);
  if (sessions_.count(id)) return false;
  auto st = std::make_unique<SessionState>();
  st->info.pduSessionId = id;
  st->info.ueIpv4Addr = ueIp;
  st->info.snssai = snssai;
  sessions_.emplace(id, std::move(st));
  return true;
}

Upf::ReleaseResult Upf::release_session(int64_t id) {
  std::unique_lock lk(sessionsMutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return ReleaseResult::UnknownSession;
  SessionState& st = *it->second;
  if (st.released.load()) return ReleaseResult::AlreadyReleased;
  st.info.released = true;
  st.info.releasedAt = util::now_sys();
  st.released.store(true, std::memory_order_release);
  return ReleaseResult::Released;
}

std::optional<PduSessionInfo> Upf::session(int64_t id) const {
  std::shared_lock lk(sessionsMutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second->info;
}

std::vector<PduSessionInfo> Upf::sessions() const {
  std::shared_lock lk(sessionsMutex_);
  std::vector<PduSessionInfo> out;
  out.reserve(sessions_.size());
  for (const auto& [_, st] : sessions_) out.push_back(st->info);
  std::sort(out.begin(), out.end(), [](const PduSessionInfo& a, const PduSessionInfo& b) {
    return a.pduSessionId < b.pduSessionId;
  });
  return out;
}

SessionTraffic Upf::session_traffic(int64_t id) const {
  std::shared_lock lk(sessionsMutex_);
  SessionTraffic t;
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return t;
  const SessionState& st = *it->second;
  t.ulBytes = st.ulBytes.load();
  t.dlBytes = st.dlBytes.load();
  t.ulPackets = st.ulPackets.load();
  t.dlPackets = st.dlPackets.load();
  t.droppedPackets = st.dropped.load();
  return t;
}

bool Upf::session_matches(const std::string& ueIp, const ees::SnssaiId& snssai,
                          const std::optional<ees::SubscriptionFilters>& filters) const {
  if (!filters) return true;
  if (filters->ueIpv4Addr && *filters->ueIpv4Addr != ueIp) return false;
  if (filters->snssai && !(*filters->snssai == snssai)) return false;
  if (filters->dnn && *filters->dnn != options_.dnn) return false;
  return true;
}

std::optional<ees::SubscriptionResponse> Upf::subscribe(const ees::SubscriptionRequest& req) {
  ees::SubscriptionRequest accepted = req;
  accepted.eventTypes.clear();
  for (ees::EventType e : req.eventTypes) {
    if (options_.supportedEventTypes.count(e)) accepted.eventTypes.insert(e);
  }
  if (accepted.eventTypes.empty()) return std::nullopt;  // nothing we can serve
  accepted.measurementTypes.clear();
  for (ees::MeasurementType m : req.measurementTypes) {
    if (options_.supportedMeasurementTypes.count(m)) accepted.measurementTypes.insert(m);
  }
  if (req.measurementTypes.empty()) accepted.measurementTypes = options_.supportedMeasurementTypes;

  const util::SysTime now = util::now_sys();
  std::lock_guard lk(aggMutex_);
  ees::SubscriptionResponse resp;
  resp.subscriptionId = "sub-" + std::to_string(nextSubId_++);
  resp.accepted = std::move(accepted);
  SubscriptionEntry entry;
  entry.response = resp;
  entry.lastReportAt = now;
  entry.windowStart = now;
  subscriptions_.emplace(resp.subscriptionId, std::move(entry));
  subscriberCount_.store(static_cast<int>(subscriptions_.size()), std::memory_order_relaxed);
  return resp;
}

bool Upf::unsubscribe(const std::string& subscriptionId) {
  std::lock_guard lk(aggMutex_);
  const bool erased = subscriptions_.erase(subscriptionId) > 0;
  subscriberCount_.store(static_cast<int>(subscriptions_.size()), std::memory_order_relaxed);
  return erased;
}

size_t Upf::subscription_count() const {
  std::lock_guard lk(aggMutex_);
  return subscriptions_.size();
}

std::vector<ees::SubscriptionResponse> Upf::subscriptions() const {
  std::lock_guard lk(aggMutex_);
  std::vector<ees::SubscriptionResponse> out;
  for (const auto& [_, e] : subscriptions_) out.push_back(e.response);
  return out;
}

inline std::pair<ForwardDecision, Upf::SessionState*> Upf::forward(const PacketDescriptor& p) {
  SessionState* st = nullptr;
  {
    std::shared_lock lk(sessionsMutex_);
    auto it = sessions_.find(p.pduSessionId);
    if (it == sessions_.end()) return {ForwardDecision::DroppedReleased, nullptr};
    st = it->second.get();
  }
  if (st->released.load(std::memory_order_acquire)) {
    st->dropped.fetch_add(1, std::memory_order_relaxed);
    return {ForwardDecision::DroppedReleased, nullptr};
  }
  if (p.direction == PacketDirection::Uplink) {
    st->ulBytes.fetch_add(p.sizeBytes, std::memory_order_relaxed);
    st->ulPackets.fetch_add(1, std::memory_order_relaxed);
  } else {
    st->dlBytes.fetch_add(p.sizeBytes, std::memory_order_relaxed);
    st->dlPackets.fetch_add(1, std::memory_order_relaxed);
  }
  return {ForwardDecision::Forwarded, st};
}

ForwardDecision Upf::forward_baseline(const PacketDescriptor& p) { return forward(p).first; }

ForwardDecision Upf::ingest_packet(const PacketDescriptor& p) {
  // with zero subscribers the aggregation path is skipped entirely
  if (subscriberCount_.load(std::memory_order_relaxed) == 0) return forward(p).first;

  auto [decision, st] = forward(p);
  if (decision != ForwardDecision::Forwarded) return decision;

  const util::SysTime arrival = util::now_sys();
  const int64_t sec = util::to_unix_ms(arrival) / 1000;
  RecordKey key;
  key.sessionId = p.pduSessionId;
  key.flow = p.flow.normalized_for_ue(p.ueIpv4Addr);

  // ueIpv4Addr and snssai never change after session creation, so reading
  // them without the sessions lock is fine
  const std::string& ueIp = st->info.ueIpv4Addr;
  const ees::SnssaiId& snssai = st->info.snssai;

  std::lock_guard lk(aggMutex_);
  for (auto& [_, sub] : subscriptions_) {
    if (!session_matches(ueIp, snssai, sub.response.accepted.filters)) continue;
    AggregateRecord& rec = sub.records[key];
    if (rec.ulPackets == 0 && rec.dlPackets == 0 && rec.buckets.empty()) rec.firstSeen = arrival;
    rec.lastSeen = arrival;
    auto& buckets = rec.buckets;
    if (buckets.empty() || buckets.back().sec != sec) {
      // wall clock regressions collapse into the newest bucket
      if (!buckets.empty() && buckets.back().sec > sec) {
        // keep
      } else {
        buckets.push_back({sec, 0, 0});
      }
    }
    auto& bucket = buckets.back();
    if (p.direction == PacketDirection::Uplink) {
      rec.ulBytes += p.sizeBytes;
      rec.ulPackets += 1;
      bucket.ulBytes += p.sizeBytes;
    } else {
      rec.dlBytes += p.sizeBytes;
      rec.dlPackets += 1;
      bucket.dlBytes += p.sizeBytes;
    }
  }
  return decision;
}

void Upf::emit_for_subscription(SubscriptionEntry& sub, util::SysTime now,
                                std::vector<OutboundNotification>& out) {
  const ees::SubscriptionRequest& acc = sub.response.accepted;
  const double windowSeconds = util::seconds_between(sub.windowStart, now);
  const int64_t windowStartSec = util::to_unix_ms(sub.windowStart) / 1000;
  const int64_t nowSec = util::to_unix_ms(now) / 1000;
  const int64_t trendCutoffSec =
      nowSec - static_cast<int64_t>(options_.trendWindows) * acc.reporting.periodSeconds;

  // sessions reachable by this subscription: active matching ones (heartbeat)
  // plus anything that still has window data (e.g. released mid-window)
  std::vector<PduSessionInfo> allSessions = sessions();
  std::map<int64_t, PduSessionInfo> byId;
  std::set<int64_t> targets;
  for (const PduSessionInfo& s : allSessions) {
    byId[s.pduSessionId] = s;
    if (!s.released && session_matches(s.ueIpv4Addr, s.snssai, acc.filters)) {
      targets.insert(s.pduSessionId);
    }
  }
  std::map<int64_t, std::vector<std::pair<const RecordKey*, const AggregateRecord*>>> bySession;
  for (const auto& [key, rec] : sub.records) {
    bySession[key.sessionId].emplace_back(&key, &rec);
    if (byId.count(key.sessionId)) targets.insert(key.sessionId);
  }
  for (auto& [_, vec] : bySession) {
    std::sort(vec.begin(), vec.end(),
              [](const auto& a, const auto& b) { return a.first->flow < b.first->flow; });
  }

  uint64_t remaining = UINT64_MAX;
  if (acc.reporting.maxReports) {
    remaining = *acc.reporting.maxReports > sub.reportsSent
                    ? *acc.reporting.maxReports - sub.reportsSent
                    : 0;
  }
  int emittedThisWindow = 0;

  for (ees::EventType eventType : acc.eventTypes) {
    for (int64_t sessionId : targets) {
      if (remaining == 0) break;
      const PduSessionInfo& info = byId[sessionId];
      ees::Notification n;
      n.subscriptionId = sub.response.subscriptionId;
      n.eventType = eventType;
      n.ueIpv4Addr = info.ueIpv4Addr;
      n.snssai = info.snssai;
      // one millisecond apart per notification: (subscriptionId, timeStamp)
      // must stay unique, it is the consumer-side dedup key
      n.timeStamp = now + std::chrono::milliseconds(emittedThisWindow);
      n.startTime = sub.windowStart;
      ++emittedThisWindow;
      auto rit = bySession.find(sessionId);
      if (rit != bySession.end()) {
        if (eventType == ees::EventType::UserDataUsageMeasures) {
          if (acc.granularity == ees::Granularity::PerFlow) {
            for (const auto& [key, rec] : rit->second) {
              // current-window view: buckets from this window only
              AggregateRecord view = *rec;
              while (!view.buckets.empty() && view.buckets.front().sec < windowStartSec) {
                view.buckets.pop_front();
              }
              n.userDataUsageMeasurements.push_back(
                  compute_measurements(view, windowSeconds, key->flow, acc.measurementTypes));
            }
          } else {
            std::vector<const AggregateRecord*> recs;
            for (const auto& [_, rec] : rit->second) recs.push_back(rec);
            AggregateRecord summed = sum_records(recs);
            while (!summed.buckets.empty() && summed.buckets.front().sec < windowStartSec) {
              summed.buckets.pop_front();
            }
            n.userDataUsageMeasurements.push_back(
                compute_measurements(summed, windowSeconds, std::nullopt, acc.measurementTypes));
          }
        } else {  // UserDataUsageTrends: sliding statistics over recent windows
          auto trend_item = [&](const AggregateRecord& rec,
                                const std::optional<ees::FlowKey>& flow) {
            AggregateRecord view = rec;
            while (!view.buckets.empty() && view.buckets.front().sec < trendCutoffSec) {
              view.buckets.pop_front();
            }
            ees::UsageMeasurementItem item;
            if (flow) item.flowInfo = ees::FlowInfo{ees::make_pack_filt_id(*flow), flow->direction};
            item.throughputStatisticsMeasurement = stats_from_buckets(view.buckets);
            return item;
          };
          if (acc.granularity == ees::Granularity::PerFlow) {
            for (const auto& [key, rec] : rit->second) {
              n.userDataUsageMeasurements.push_back(trend_item(*rec, key->flow));
            }
          } else {
            std::vector<const AggregateRecord*> recs;
            for (const auto& [_, rec] : rit->second) recs.push_back(rec);
            n.userDataUsageMeasurements.push_back(trend_item(sum_records(recs), std::nullopt));
          }
        }
      }
      out.push_back(OutboundNotification{acc.notifyUri, std::move(n), 0});
      ++sub.reportsSent;
      if (remaining != UINT64_MAX) --remaining;
    }
    if (remaining == 0) break;
  }

  // window reset: counters zeroed, trend history pruned, dead records dropped
  for (auto it = sub.records.begin(); it != sub.records.end();) {
    AggregateRecord& rec = it->second;
    rec.ulBytes = rec.dlBytes = 0;
    rec.ulPackets = rec.dlPackets = 0;
    while (!rec.buckets.empty() && rec.buckets.front().sec < trendCutoffSec) {
      rec.buckets.pop_front();
    }
    if (rec.buckets.empty()) {
      it = sub.records.erase(it);
    } else {
      ++it;
    }
  }
  sub.lastReportAt = now;
  sub.windowStart = now;
}

std::vector<OutboundNotification> Upf::notifier_tick(util::SysTime now) {
  std::vector<OutboundNotification> out;
  std::lock_guard lk(aggMutex_);
  for (auto it = subscriptions_.begin(); it != subscriptions_.end();) {
    SubscriptionEntry& sub = it->second;
    const ees::ReportingMode& mode = sub.response.accepted.reporting;
    if (mode.expiry && now >= *mode.expiry) {
      it = subscriptions_.erase(it);
      continue;
    }
    if (util::seconds_between(sub.lastReportAt, now) >=
        static_cast<double>(mode.periodSeconds)) {
      emit_for_subscription(sub, now, out);
      if (mode.maxReports && sub.reportsSent >= *mode.maxReports) {
        it = subscriptions_.erase(it);
        subscriberCount_.store(static_cast<int>(subscriptions_.size()),
                               std::memory_order_relaxed);
        continue;
      }
    }
    ++it;
  }
  subscriberCount_.store(static_cast<int>(subscriptions_.size()), std::memory_order_relaxed);
  return out;
}

}  // namespace cloop::upf
