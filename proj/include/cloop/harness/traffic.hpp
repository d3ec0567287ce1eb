#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "cloop/upf/upf.hpp"

namespace cloop::harness {

enum class UeBehavior { BenignIperf, BenignWeb, BotScan };

const char* to_token(UeBehavior v);
std::optional<UeBehavior> ue_behavior_from_token(const std::string& s);

struct UeProfile {
  std::string ueIpv4Addr;
  int64_t pduSessionId = 0;
  UeBehavior behavior = UeBehavior::BenignIperf;
  double rateMbps = 10.0;    // BENIGN_IPERF uplink rate
  double gapSeconds = 0.05;  // BOT_SCAN gap between consecutive servers
  uint64_t seed = 1;
};

struct TimedPacket {
  double at = 0;  // seconds since stream start
  upf::PacketDescriptor pkt;
};

/// Deterministic, seeded, infinite descriptor stream for one UE. The stream
/// simulates both directions (requests and the data network's responses);
/// wall-clock pacing is the driver's job.
class TrafficStream {
 public:
  TrafficStream(UeProfile profile, std::vector<std::string> servers);

  TimedPacket next();
  const UeProfile& profile() const { return profile_; }

 private:
  TimedPacket make(double at, const std::string& peer, uint16_t srcPort, uint16_t dstPort,
                   uint32_t size, upf::PacketDirection dir) const;
  void refill();

  UeProfile profile_;
  std::vector<std::string> servers_;
  uint64_t rngState_;
  double clock_ = 0;
  size_t scanIndex_ = 0;
  uint64_t counter_ = 0;
  std::vector<TimedPacket> pending_;  // drained front to back
  size_t pendingNext_ = 0;

  uint64_t rnd();
  uint64_t rnd_between(uint64_t lo, uint64_t hi);
};

/// Where generated descriptors go. In-process mode calls the UPF core
/// directly; multi-process mode writes frames to the ingestion socket.
class PacketSink {
 public:
  virtual ~PacketSink() = default;
  /// Fire-and-forget data-path send.
  virtual void send(const upf::PacketDescriptor& pkt) = 0;
  /// Probe with echo wait; true = echo seen within the timeout.
  virtual bool probe(const upf::PacketDescriptor& pkt, double timeoutSeconds) = 0;
};

class InprocSink : public PacketSink {
 public:
  explicit InprocSink(upf::Upf* upf) : upf_(upf) {}
  void send(const upf::PacketDescriptor& pkt) override { upf_->ingest_packet(pkt); }
  bool probe(const upf::PacketDescriptor& pkt, double) override {
    return upf_->ingest_packet(pkt) == upf::ForwardDecision::Forwarded;
  }

 private:
  upf::Upf* upf_;
};

/// Framed-TCP sink; owns one connection. probe() must not share a sink with
/// data traffic (echo frames would interleave).
class TcpSink : public PacketSink {
 public:
  TcpSink(const std::string& host, int port);
  ~TcpSink() override;
  bool connected() const { return fd_ >= 0; }
  void send(const upf::PacketDescriptor& pkt) override;
  bool probe(const upf::PacketDescriptor& pkt, double timeoutSeconds) override;

 private:
  int fd_ = -1;
};

struct TrafficStats {
  uint64_t packets = 0;
  uint64_t ulBytes = 0;
  uint64_t dlBytes = 0;
};

/// Paces a stream against wall time until the stop flag rises or duration
/// elapses. Stamps descriptor timestamps at send time.
TrafficStats drive_traffic(TrafficStream& stream, PacketSink& sink, double durationSeconds,
                           const std::atomic<bool>& stop);

struct ProbeSample {
  util::SysTime sentAt{};
  util::SysTime decidedAt{};  // when success/failure became known
  bool success = false;
};

struct ProbeSeries {
  std::vector<ProbeSample> samples;
  /// Failure-observation time of the first failure preceded by >= 1 success.
  std::optional<util::SysTime> firstFailure;
  size_t successes = 0;
};

/// Live view of a probe loop for concurrent readers; timestamps are unix ms,
/// -1 until observed.
struct ProbeMonitor {
  std::atomic<int64_t> firstFailureMs{-1};
  std::atomic<uint64_t> successes{0};
  std::atomic<uint64_t> failures{0};
};

/// One probe per second against `probeTarget`; success iff the echo arrives
/// within the timeout. Runs until the stop flag rises. Failures are
/// timestamped at the moment they are observed.
ProbeSeries run_probe_loop(const UeProfile& ue, const std::string& probeTarget, PacketSink& sink,
                           double timeoutSeconds, const std::atomic<bool>& stop,
                           double intervalSeconds = 1.0, ProbeMonitor* monitor = nullptr);

}  // namespace cloop::harness
