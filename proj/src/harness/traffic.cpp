#include "cloop/harness/traffic.hpp"

#include <unistd.h>

#include <algorithm>
#include <thread>

#include "cloop/util/framing.hpp"
#include "cloop/util/log.hpp"

namespace cloop::harness {

const char* to_token(UeBehavior v) {
  switch (v) {
    case UeBehavior::BenignIperf: return "BENIGN_IPERF";
    case UeBehavior::BenignWeb: return "BENIGN_WEB";
    case UeBehavior::BotScan: return "BOT_SCAN";
  }
  return "?";
}

std::optional<UeBehavior> ue_behavior_from_token(const std::string& s) {
  if (s == "BENIGN_IPERF") return UeBehavior::BenignIperf;
  if (s == "BENIGN_WEB") return UeBehavior::BenignWeb;
  if (s == "BOT_SCAN") return UeBehavior::BotScan;
  return std::nullopt;
}

namespace {
constexpr uint32_t kIperfPacketBytes = 1250;
constexpr uint32_t kAckBytes = 66;
constexpr uint16_t kIperfPort = 5201;
constexpr uint16_t kWebPort = 80;
constexpr uint16_t kScanPort = 8080;

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

TrafficStream::TrafficStream(UeProfile profile, std::vector<std::string> servers)
    : profile_(std::move(profile)), servers_(std::move(servers)), rngState_(mix(profile_.seed)) {}

uint64_t TrafficStream::rnd() {
  rngState_ = mix(rngState_);
  return rngState_;
}

uint64_t TrafficStream::rnd_between(uint64_t lo, uint64_t hi) {
  return lo + rnd() % (hi - lo + 1);
}

TimedPacket TrafficStream::make(double at, const std::string& peer, uint16_t srcPort,
                                uint16_t dstPort, uint32_t size,
                                upf::PacketDirection dir) const {
  TimedPacket tp;
  tp.at = at;
  upf::PacketDescriptor& p = tp.pkt;
  p.pduSessionId = profile_.pduSessionId;
  p.ueIpv4Addr = profile_.ueIpv4Addr;
  p.sizeBytes = size;
  p.direction = dir;
  p.kind = upf::PacketKind::Data;
  if (dir == upf::PacketDirection::Uplink) {
    p.flow = ees::FlowKey{profile_.ueIpv4Addr, peer, srcPort, dstPort,
                          ees::FlowDirection::Uplink};
  } else {
    p.flow = ees::FlowKey{peer, profile_.ueIpv4Addr, dstPort, srcPort,
                          ees::FlowDirection::Downlink};
  }
  return tp;
}

void TrafficStream::refill() {
  switch (profile_.behavior) {
    case UeBehavior::BenignIperf: {
      // fixed-rate bulk flow to one server with a sparse downlink ack stream
      const std::string& srv = servers_[profile_.seed % servers_.size()];
      const uint16_t sport = static_cast<uint16_t>(52000 + profile_.seed % 1000);
      const double interval = kIperfPacketBytes * 8.0 / (profile_.rateMbps * 1e6);
      for (int i = 0; i < 64; ++i) {
        pending_.push_back(make(clock_, srv, sport, kIperfPort, kIperfPacketBytes,
                                upf::PacketDirection::Uplink));
        ++counter_;
        if (counter_ % 20 == 0) {
          pending_.push_back(
              make(clock_, srv, sport, kIperfPort, kAckBytes, upf::PacketDirection::Downlink));
        }
        clock_ += interval;
      }
      break;
    }
    case UeBehavior::BenignWeb: {
      // short request/response exchanges against <= 3 servers
      const size_t fanout = 1 + profile_.seed % std::min<size_t>(3, servers_.size());
      const std::string& srv = servers_[rnd() % fanout];
      const uint16_t sport = static_cast<uint16_t>(40000 + rnd_between(0, 4000));
      pending_.push_back(make(clock_, srv, sport, kWebPort,
                              static_cast<uint32_t>(rnd_between(200, 600)),
                              upf::PacketDirection::Uplink));
      const uint64_t responseBytes = rnd_between(2000, 20000);
      double t = clock_ + 0.002;
      for (uint64_t sent = 0; sent < responseBytes; sent += kIperfPacketBytes) {
        const uint32_t chunk =
            static_cast<uint32_t>(std::min<uint64_t>(kIperfPacketBytes, responseBytes - sent));
        pending_.push_back(make(t, srv, sport, kWebPort, chunk, upf::PacketDirection::Downlink));
        t += 0.0004;
      }
      clock_ = t + static_cast<double>(rnd_between(200, 800)) / 1000.0;  // think time
      break;
    }
    case UeBehavior::BotScan: {
      // one small bidirectional exchange per server, in sequence, cycling
      const std::string& srv = servers_[scanIndex_ % servers_.size()];
      ++scanIndex_;
      const uint16_t sport = static_cast<uint16_t>(50000 + scanIndex_ % 8000);
      pending_.push_back(make(clock_, srv, sport, kScanPort, 74, upf::PacketDirection::Uplink));
      pending_.push_back(
          make(clock_ + 0.001, srv, sport, kScanPort, 54, upf::PacketDirection::Downlink));
      clock_ += profile_.gapSeconds;
      break;
    }
  }
}

TimedPacket TrafficStream::next() {
  if (pendingNext_ >= pending_.size()) {
    pending_.clear();
    pendingNext_ = 0;
    refill();
  }
  return pending_[pendingNext_++];
}

TcpSink::TcpSink(const std::string& host, int port) : fd_(util::tcp_connect(host, port)) {
  if (fd_ < 0) util::log_error("harness", "cannot connect ingest sink to " + host);
}

TcpSink::~TcpSink() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpSink::send(const upf::PacketDescriptor& pkt) {
  if (fd_ < 0) return;
  util::write_frame(fd_, upf::encode_packet_descriptor(pkt));
}

bool TcpSink::probe(const upf::PacketDescriptor& pkt, double timeoutSeconds) {
  if (fd_ < 0) return false;
  if (!util::write_frame(fd_, upf::encode_packet_descriptor(pkt))) return false;
  auto echo = util::read_frame(fd_, static_cast<int>(timeoutSeconds * 1000));
  return echo.has_value();
}

TrafficStats drive_traffic(TrafficStream& stream, PacketSink& sink, double durationSeconds,
                           const std::atomic<bool>& stop) {
  TrafficStats stats;
  const util::SteadyTime start = util::now_steady();
  while (!stop.load(std::memory_order_relaxed)) {
    TimedPacket tp = stream.next();
    if (tp.at > durationSeconds) break;
    const util::SteadyTime due = start + std::chrono::duration_cast<std::chrono::nanoseconds>(
                                             std::chrono::duration<double>(tp.at));
    const util::SteadyTime now = util::now_steady();
    if (due > now) std::this_thread::sleep_until(due);
    tp.pkt.timestampNs = util::steady_ns(util::now_steady());
    sink.send(tp.pkt);
    ++stats.packets;
    if (tp.pkt.direction == upf::PacketDirection::Uplink) {
      stats.ulBytes += tp.pkt.sizeBytes;
    } else {
      stats.dlBytes += tp.pkt.sizeBytes;
    }
  }
  return stats;
}

ProbeSeries run_probe_loop(const UeProfile& ue, const std::string& probeTarget, PacketSink& sink,
                           double timeoutSeconds, const std::atomic<bool>& stop,
                           double intervalSeconds, ProbeMonitor* monitor) {
  ProbeSeries series;
  const util::SteadyTime start = util::now_steady();
  uint64_t tick = 0;
  while (!stop.load(std::memory_order_relaxed)) {
    upf::PacketDescriptor p;
    p.flow = ees::FlowKey{ue.ueIpv4Addr, probeTarget, 4000, 7, ees::FlowDirection::Uplink};
    p.pduSessionId = ue.pduSessionId;
    p.ueIpv4Addr = ue.ueIpv4Addr;
    p.sizeBytes = 64;
    p.direction = upf::PacketDirection::Uplink;
    p.kind = upf::PacketKind::Probe;
    p.timestampNs = util::steady_ns(util::now_steady());

    ProbeSample sample;
    sample.sentAt = util::now_sys();
    sample.success = sink.probe(p, timeoutSeconds);
    sample.decidedAt = util::now_sys();  // failure is timestamped when observed
    if (sample.success) {
      ++series.successes;
      if (monitor) monitor->successes.fetch_add(1);
    } else {
      if (monitor) monitor->failures.fetch_add(1);
      if (series.successes > 0 && !series.firstFailure) {
        series.firstFailure = sample.decidedAt;
        if (monitor) monitor->firstFailureMs.store(util::to_unix_ms(sample.decidedAt));
      }
    }
    series.samples.push_back(sample);

    ++tick;
    const util::SteadyTime due =
        start + std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::duration<double>(static_cast<double>(tick) * intervalSeconds));
    while (!stop.load(std::memory_order_relaxed) && util::now_steady() < due) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  return series;
}

}  // namespace cloop::harness
