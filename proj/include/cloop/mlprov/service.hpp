#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cloop/mlprov/registry.hpp"

namespace cloop::mlprov {

struct MlSubscription {
  std::string subscriptionId;
  std::string eventId;
  std::map<std::string, std::string> filters;
  std::string notifyUri;
};

struct MlServiceConfig {
  std::string listenAddr = "127.0.0.1";
  int port = 0;  // 0 = pick a free port
  std::filesystem::path registryDir;
};

MlServiceConfig load_mlprov_config(const std::string& tomlPath);

/// Model provisioning service: versioned registry, subscription-based
/// update notification, admin registration and a batch inference endpoint.
///
/// HTTP surface:
///   POST   /nnwdaf-mlmodelprovision/v1/subscriptions
///   DELETE /nnwdaf-mlmodelprovision/v1/subscriptions/{id}
///   POST   /admin/models
///   GET    /models?event-id=...
///   POST   /models/{name}/{version}:infer
class MlProvisionService {
 public:
  explicit MlProvisionService(MlServiceConfig cfg);
  ~MlProvisionService();

  MlProvisionService(const MlProvisionService&) = delete;
  MlProvisionService& operator=(const MlProvisionService&) = delete;

  bool start();
  void stop();

  int port() const { return port_; }
  std::string base_uri() const;

  ModelRegistry& registry() { return registry_; }

  /// Registers and fans out update notifications to matching subscriptions
  /// (outside the registry write lock). Returns the stored descriptor.
  ModelDescriptor register_model(ForestModel model);

  std::string inference_uri(const ModelDescriptor& d) const;

  size_t update_notifications_sent() const { return notificationsSent_.load(); }

 private:
  struct Impl;

  void setup_routes();
  void notify_subscribers(const ModelDescriptor& d);
  bool subscription_matches(const MlSubscription& s, const ModelDescriptor& d) const;

  MlServiceConfig cfg_;
  ModelRegistry registry_;
  std::unique_ptr<Impl> impl_;
  std::thread serverThread_;
  int port_ = 0;

  mutable std::mutex subsMutex_;
  std::vector<MlSubscription> subscriptions_;
  uint64_t nextSubId_ = 1;
  std::atomic<size_t> notificationsSent_{0};

  mutable std::mutex cacheMutex_;
  std::map<std::pair<std::string, int>, std::shared_ptr<const ForestModel>> cache_;

  std::shared_ptr<const ForestModel> cached_model(const std::string& name, int version);
};

}  // namespace cloop::mlprov
