#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cloop/upf/upf.hpp"

namespace cloop::upf {

struct UpfServiceConfig {
  std::string listenAddr = "127.0.0.1";
  int eePort = 0;       // HTTP: EES + N4 control; 0 picks a free port
  int ingestPort = 0;   // TCP packet-descriptor frames; -1 disables the listener
  UpfOptions options;
  int notifierIntervalMs = 100;
  int deliveryTimeoutMs = 1000;
};

/// Reads upf.toml: listen_addr, ee_port, ingest_port (+ optional dnn, upf_id).
UpfServiceConfig load_upf_config(const std::string& tomlPath);

/// Network front of the UPF core.
///
/// HTTP: POST /nupf-ee/v1/ee-subscriptions, DELETE /nupf-ee/v1/ee-subscriptions/{id},
///       POST /n4/v1/sessions (provisioning), POST /n4/v1/sessions/{id}/release,
///       GET /n4/v1/sessions, GET /stats/sessions/{id}, GET /healthz.
/// TCP:  length-prefixed JSON PacketDescriptor frames; PROBE packets on
///       ACTIVE sessions are echoed back on the same connection.
///
/// Notifications are delivered by a timer thread (<= 100 ms cadence) via
/// HTTP POST with a bounded timeout and a single retry on the next tick;
/// delivery never runs inside the core's locks.
class UpfService {
 public:
  explicit UpfService(UpfServiceConfig cfg);
  ~UpfService();

  UpfService(const UpfService&) = delete;
  UpfService& operator=(const UpfService&) = delete;

  bool start();
  void stop();

  Upf& core() { return upf_; }
  int ee_port() const { return eePort_; }
  int ingest_port() const { return ingestPort_; }
  std::string base_uri() const;

  size_t notifications_delivered() const { return delivered_.load(); }
  size_t delivery_failures() const { return deliveryFailures_.load(); }

 private:
  struct Impl;

  void notifier_loop();
  void ingest_listener_loop();
  void ingest_connection(int fd);
  void deliver(OutboundNotification&& n, std::vector<OutboundNotification>& retryOut);

  UpfServiceConfig cfg_;
  Upf upf_;
  std::unique_ptr<Impl> impl_;

  std::thread serverThread_;
  std::thread notifierThread_;
  std::thread ingestThread_;
  std::atomic<bool> stopping_{false};
  int eePort_ = 0;
  int ingestPort_ = -1;
  int listenFd_ = -1;

  std::mutex retryMutex_;
  std::vector<OutboundNotification> retryQueue_;

  std::mutex connMutex_;
  std::vector<std::thread> connThreads_;

  std::atomic<size_t> delivered_{0};
  std::atomic<size_t> deliveryFailures_{0};
};

}  // namespace cloop::upf
