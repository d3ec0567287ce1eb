#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cloop/nwdaf/store.hpp"
#include "cloop/nwdaf/types.hpp"

namespace cloop::nwdaf {

struct AnalysisOutcome {
  enum class Status { Ok, NoModel, InferenceUnreachable };
  Status status = Status::Ok;
  std::vector<DetectionResult> results;
};

/// Synchronous analytics engine contract; invoked by the NBI dispatcher on
/// the consumer's notification period over the latest data window.
class AnalyticsEngine {
 public:
  virtual ~AnalyticsEngine() = default;
  virtual AnalysisOutcome analyze(util::SysTime windowStart, util::SysTime windowEnd) = 0;
};

/// Inference endpoint descriptor delivered by the model provisioning
/// service, forwarded to the engine.
struct ModelEndpoint {
  std::string inferenceUri;
  std::string name;
  int version = 0;
  std::vector<std::string> featureSchema;
};

struct NwdafConfig {
  std::string listenAddr = "127.0.0.1";
  int port = 0;
  std::string upfUri;           // EES provider; empty disables the SBI client
  int collectionPeriodS = 1;
  std::string storePath = "nwdaf_reports.jsonl";
  std::string mlProvisionUri;   // empty disables the model subscription
  std::string sourceUpfId = "upf-1";
  int dispatchIntervalMs = 50;
  int deliveryTimeoutMs = 1000;
};

NwdafConfig load_nwdaf_config(const std::string& tomlPath);

/// NWDAF shell: southbound UPF client + durable report datastore, and the
/// northbound analytics subscription service.
///
/// HTTP surface:
///   POST   /sbi/notify                                    (UPF callback)
///   POST   /nnwdaf-eventssubscription/v1/subscriptions
///   DELETE /nnwdaf-eventssubscription/v1/subscriptions/{id}
///   GET    /nnwdaf-analyticsinfo/v1/analytics?event-id=...
///   POST   /ml/notify                                     (model updates)
///   GET    /store/reports?start=&end=&ue=
///   GET    /healthz
class NwdafService {
 public:
  explicit NwdafService(NwdafConfig cfg);
  ~NwdafService();

  NwdafService(const NwdafService&) = delete;
  NwdafService& operator=(const NwdafService&) = delete;

  bool start();
  void stop();

  int port() const { return port_; }
  std::string base_uri() const;

  ReportStore& store() { return *store_; }

  void set_engine(AnalyticsEventId eventId, AnalyticsEngine* engine);
  void set_model_update_handler(std::function<void(const ModelEndpoint&)> handler);
  /// Serialized JSON array served at GET /engine/detections (multiproc
  /// instrumentation); optional.
  void set_detection_log_provider(std::function<std::string()> provider);
  /// Invoked synchronously right after a report is durably stored.
  void set_report_observer(std::function<void(const StoredUsageReport&)> observer);

  /// In-process NBI subscribe, same semantics as the HTTP endpoint.
  std::string nbi_subscribe(AnalyticsSubscription s);
  bool nbi_unsubscribe(const std::string& id);

  size_t engine_errors() const { return engineErrors_.load(); }
  bool sbi_subscribed() const { return sbiSubscribed_.load(); }
  std::string sbi_subscription_id() const;

 private:
  struct Impl;
  struct NbiEntry {
    AnalyticsSubscription sub;
    util::SysTime lastDispatch{};
  };

  void sbi_subscribe_loop();
  void dispatch_loop();
  void subscribe_to_ml_provision();
  AbnormalBehaviourNotification run_engine_for(const AnalyticsSubscription& sub,
                                               util::SysTime now, bool& ok);

  NwdafConfig cfg_;
  std::unique_ptr<ReportStore> store_;
  std::unique_ptr<Impl> impl_;

  std::thread serverThread_;
  std::thread sbiThread_;
  std::thread dispatchThread_;
  std::atomic<bool> stopping_{false};
  int port_ = 0;

  std::map<AnalyticsEventId, AnalyticsEngine*> engines_;
  std::function<void(const ModelEndpoint&)> modelHandler_;
  std::function<std::string()> detectionLogProvider_;
  std::function<void(const StoredUsageReport&)> reportObserver_;
  mutable std::mutex hooksMutex_;

  mutable std::mutex nbiMutex_;
  std::map<std::string, NbiEntry> nbiSubs_;
  uint64_t nextNbiId_ = 1;
  struct PendingDelivery {
    std::string notifyUri;
    std::string body;
    int attempts = 0;
  };
  std::vector<PendingDelivery> retryQueue_;

  std::atomic<size_t> engineErrors_{0};
  std::atomic<bool> sbiSubscribed_{false};
  mutable std::mutex sbiMutex_;
  std::string sbiSubscriptionId_;
};

}  // namespace cloop::nwdaf
