#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloop/ees/types.hpp"
#include "cloop/util/time.hpp"

namespace cloop::upf {

enum class PacketKind { Data, Probe };
enum class PacketDirection { Uplink, Downlink };

const char* to_token(PacketKind v);
const char* to_token(PacketDirection v);
std::optional<PacketKind> packet_kind_from_token(const std::string& s);
std::optional<PacketDirection> packet_direction_from_token(const std::string& s);

struct PacketDescriptor {
  ees::FlowKey flow;
  int64_t pduSessionId = 0;
  std::string ueIpv4Addr;
  uint32_t sizeBytes = 0;
  PacketDirection direction = PacketDirection::Uplink;
  PacketKind kind = PacketKind::Data;
  int64_t timestampNs = 0;  // sender's monotonic clock; informational

  bool operator==(const PacketDescriptor&) const = default;
};

/// Boundary validation: sizeBytes >= 1, IPv4 fields parse, UPLINK packets
/// originate at the UE address and DOWNLINK packets terminate there.
/// Throws ees::CodecError(InvariantViolation).
void validate(const PacketDescriptor& p);

PacketDescriptor decode_packet_descriptor(std::string_view raw);  // ees::CodecError
std::string encode_packet_descriptor(const PacketDescriptor& p);

enum class ForwardDecision { Forwarded, DroppedReleased };

struct PduSessionInfo {
  int64_t pduSessionId = 0;
  std::string ueIpv4Addr;
  ees::SnssaiId snssai;
  bool released = false;
  util::SysTime releasedAt{};
};

struct SessionTraffic {
  uint64_t ulBytes = 0;
  uint64_t dlBytes = 0;
  uint64_t ulPackets = 0;
  uint64_t dlPackets = 0;
  uint64_t droppedPackets = 0;
};

/// Running counters for one (subscription, session, flow); the hot path only
/// bumps these, all report math is deferred to notification time.
struct AggregateRecord {
  uint64_t ulBytes = 0;
  uint64_t dlBytes = 0;
  uint64_t ulPackets = 0;
  uint64_t dlPackets = 0;
  struct SecondBucket {
    int64_t sec = 0;  // unix seconds
    uint64_t ulBytes = 0;
    uint64_t dlBytes = 0;
  };
  std::deque<SecondBucket> buckets;  // spans the trends history, pruned at emission
  util::SysTime firstSeen{};
  util::SysTime lastSeen{};
};

/// Report math for one record over one window. Flow info is attached for
/// PER_FLOW items; only requested measurement families are populated
/// (Throughput covers both the plain and the statistics body).
ees::UsageMeasurementItem compute_measurements(const AggregateRecord& rec, double windowSeconds,
                                               const std::optional<ees::FlowKey>& flowForInfo,
                                               const std::set<ees::MeasurementType>& requested);

/// Field-wise sum used for PER_SESSION reporting; buckets merge by second.
AggregateRecord sum_records(std::span<const AggregateRecord* const> records);

struct OutboundNotification {
  std::string notifyUri;
  ees::Notification notification;
  int attempts = 0;
};

struct UpfOptions {
  std::set<ees::EventType> supportedEventTypes = {ees::EventType::UserDataUsageMeasures,
                                                  ees::EventType::UserDataUsageTrends};
  std::set<ees::MeasurementType> supportedMeasurementTypes = {ees::MeasurementType::Volume,
                                                              ees::MeasurementType::Throughput};
  std::string upfId = "upf-1";
  std::string dnn = "internet";  // data network this UPF serves; matched by dnn filters
  int trendWindows = 3;          // trailing windows feeding USER_DATA_USAGE_TRENDS
};

/// The user-plane core: session table, per-subscription aggregation and the
/// notification generator. Thread contract: packet ingestion, control-plane
/// calls and the notifier may run concurrently; subscription mutation and
/// ingestion are mutually excluded; snapshot-and-reset at report time is
/// atomic with respect to ingestion. No network I/O happens in here.
class Upf {
 public:
  explicit Upf(UpfOptions options = {});

  // --- session control (N4 side) ---
  bool add_session(int64_t id, const std::string& ueIp, const ees::SnssaiId& snssai);
  enum class ReleaseResult { Released, AlreadyReleased, UnknownSession };
  ReleaseResult release_session(int64_t id);
  std::optional<PduSessionInfo> session(int64_t id) const;
  std::vector<PduSessionInfo> sessions() const;
  SessionTraffic session_traffic(int64_t id) const;

  // --- EES server ---
  /// nullopt = every requested event type is unsupported; no subscription is
  /// created. Otherwise unsupported types are silently omitted from
  /// `accepted` and a never-reused id is assigned. An empty requested
  /// measurement set accepts the full supported set.
  std::optional<ees::SubscriptionResponse> subscribe(const ees::SubscriptionRequest& req);
  bool unsubscribe(const std::string& subscriptionId);
  size_t subscription_count() const;
  std::vector<ees::SubscriptionResponse> subscriptions() const;

  // --- hot path ---
  ForwardDecision ingest_packet(const PacketDescriptor& p);
  /// Data-path-only variant with the aggregation hook compiled out; the
  /// overhead benchmark's BASELINE.
  ForwardDecision forward_baseline(const PacketDescriptor& p);

  // --- notifier ---
  /// Emits due notifications (one per event type and session), resets window
  /// counters, enforces maxReports/expiry. Call at <= 100 ms cadence; the
  /// caller owns delivery.
  std::vector<OutboundNotification> notifier_tick(util::SysTime now);

  const UpfOptions& options() const { return options_; }

 private:
  struct SessionState {
    PduSessionInfo info;
    std::atomic<bool> released{false};
    std::atomic<uint64_t> ulBytes{0}, dlBytes{0}, ulPackets{0}, dlPackets{0}, dropped{0};
  };

  struct RecordKey {
    int64_t sessionId = 0;
    ees::FlowKey flow;
    bool operator==(const RecordKey&) const = default;
  };
  struct RecordKeyHash {
    size_t operator()(const RecordKey& k) const;
  };

  struct SubscriptionEntry {
    ees::SubscriptionResponse response;
    util::SysTime lastReportAt{};
    util::SysTime windowStart{};
    uint32_t reportsSent = 0;
    std::unordered_map<RecordKey, AggregateRecord, RecordKeyHash> records;
  };

  bool session_matches(const std::string& ueIp, const ees::SnssaiId& snssai,
                       const std::optional<ees::SubscriptionFilters>& filters) const;
  void emit_for_subscription(SubscriptionEntry& sub, util::SysTime now,
                             std::vector<OutboundNotification>& out);
  std::pair<ForwardDecision, SessionState*> forward(const PacketDescriptor& p);

  UpfOptions options_;

  mutable std::shared_mutex sessionsMutex_;
  std::unordered_map<int64_t, std::unique_ptr<SessionState>> sessions_;

  mutable std::mutex aggMutex_;  // subscriptions + aggregate store
  std::map<std::string, SubscriptionEntry> subscriptions_;
  uint64_t nextSubId_ = 1;
  std::atomic<int> subscriberCount_{0};
};

}  // namespace cloop::upf
