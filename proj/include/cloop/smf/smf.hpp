#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cloop/nwdaf/types.hpp"

namespace cloop::smf {

struct UeSessionBinding {
  std::string ueIpv4Addr;
  int64_t pduSessionId = 0;
  bool released = false;
  std::optional<util::SysTime> releasedAt;
};

struct MitigationAction {
  std::string ueIpv4Addr;
  int64_t pduSessionId = 0;
  bool releaseSucceeded = false;
};

/// Mitigation core: maps flagged UEs to their PDU sessions and drives the
/// release policy. Notification handling is serialized; a UE is released at
/// most once for the scenario lifetime (a failed release stays ACTIVE and is
/// retried on the next notification).
class Smf {
 public:
  /// Returns true when the UPF acknowledged the release.
  using ReleaseFn = std::function<bool(int64_t pduSessionId)>;

  Smf(std::vector<UeSessionBinding> bindings, ReleaseFn release);

  std::vector<MitigationAction> handle_notification(const nwdaf::AbnormalBehaviourNotification& n);

  std::vector<UeSessionBinding> bindings() const;
  std::optional<UeSessionBinding> binding(const std::string& ue) const;
  size_t release_calls() const;  // outbound UPF release requests issued

  void set_release_observer(std::function<void(const UeSessionBinding&)> observer);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, UeSessionBinding> bindings_;
  ReleaseFn release_;
  size_t releaseCalls_ = 0;
  std::function<void(const UeSessionBinding&)> observer_;
};

struct SmfConfig {
  std::string listenAddr = "127.0.0.1";
  int port = 0;
  std::string nwdafUri;
  std::string upfUri;
  int reportPeriodS = 1;
  std::optional<std::set<nwdaf::ExceptionId>> exceptionFilter;
  std::vector<UeSessionBinding> sessions;
};

/// smf.toml: nwdaf_uri, upf_uri, report_period_s, [[sessions]] with
/// ue_ipv4_addr / pdu_session_id.
SmfConfig load_smf_config(const std::string& tomlPath);

/// HTTP front: receives NWDAF abnormal-behaviour notifications at
/// /smf/notify, keeps one active NWDAF subscription (retrying until the
/// NWDAF is reachable), and issues UPF releases over N4.
class SmfService {
 public:
  explicit SmfService(SmfConfig cfg);
  ~SmfService();

  SmfService(const SmfService&) = delete;
  SmfService& operator=(const SmfService&) = delete;

  bool start();
  void stop();

  int port() const { return port_; }
  std::string base_uri() const;
  Smf& core() { return *core_; }

  /// Idempotent: returns the existing subscription id when already active.
  /// Empty string while still retrying.
  std::string subscription_id() const;
  bool subscribed() const { return subscribed_.load(); }

 private:
  struct Impl;
  void subscribe_loop();

  SmfConfig cfg_;
  std::unique_ptr<Smf> core_;
  std::unique_ptr<Impl> impl_;
  std::thread serverThread_;
  std::thread subscribeThread_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> subscribed_{false};
  int port_ = 0;
  mutable std::mutex subMutex_;
  std::string subscriptionId_;
};

}  // namespace cloop::smf
