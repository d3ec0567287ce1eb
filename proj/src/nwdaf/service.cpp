#include "cloop/nwdaf/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/log.hpp"
#include "cloop/util/toml.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::nwdaf {

using nlohmann::json;

struct NwdafService::Impl {
  httplib::Server server;
};

NwdafConfig load_nwdaf_config(const std::string& tomlPath) {
  util::toml::Document doc = util::toml::parse_file(tomlPath);
  NwdafConfig cfg;
  std::string addr = util::toml::get_string(doc.root, "listen_addr", "127.0.0.1:0");
  const size_t colon = addr.rfind(':');
  if (colon != std::string::npos) {
    cfg.listenAddr = addr.substr(0, colon);
    cfg.port = std::stoi(addr.substr(colon + 1));
  } else {
    cfg.listenAddr = addr;
  }
  cfg.upfUri = util::toml::get_string(doc.root, "upf_uri", "");
  cfg.collectionPeriodS =
      static_cast<int>(util::toml::get_int(doc.root, "collection_period_s", 1));
  cfg.storePath = util::toml::get_string(doc.root, "store_path", "nwdaf_reports.jsonl");
  cfg.mlProvisionUri = util::toml::get_string(doc.root, "ml_provision_uri", "");
  return cfg;
}

namespace {

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& detail) {
  res.status = status;
  res.set_content(json{{"error", code}, {"detail", detail}}.dump(), "application/json");
}

}  // namespace

NwdafService::NwdafService(NwdafConfig cfg)
    : cfg_(std::move(cfg)),
      store_(std::make_unique<ReportStore>(cfg_.storePath)),
      impl_(std::make_unique<Impl>()) {}

NwdafService::~NwdafService() { stop(); }

std::string NwdafService::base_uri() const {
  return "http://" + cfg_.listenAddr + ":" + std::to_string(port_);
}

void NwdafService::set_engine(AnalyticsEventId eventId, AnalyticsEngine* engine) {
  std::lock_guard lk(hooksMutex_);
  engines_[eventId] = engine;
}

void NwdafService::set_model_update_handler(std::function<void(const ModelEndpoint&)> handler) {
  std::lock_guard lk(hooksMutex_);
  modelHandler_ = std::move(handler);
}

void NwdafService::set_detection_log_provider(std::function<std::string()> provider) {
  std::lock_guard lk(hooksMutex_);
  detectionLogProvider_ = std::move(provider);
}

void NwdafService::set_report_observer(std::function<void(const StoredUsageReport&)> observer) {
  std::lock_guard lk(hooksMutex_);
  reportObserver_ = std::move(observer);
}

std::string NwdafService::sbi_subscription_id() const {
  std::lock_guard lk(sbiMutex_);
  return sbiSubscriptionId_;
}

std::string NwdafService::nbi_subscribe(AnalyticsSubscription s) {
  std::lock_guard lk(nbiMutex_);
  s.subscriptionId = "asub-" + std::to_string(nextNbiId_++);
  NbiEntry entry;
  entry.sub = s;
  entry.lastDispatch = util::now_sys();
  nbiSubs_.emplace(s.subscriptionId, std::move(entry));
  return s.subscriptionId;
}

bool NwdafService::nbi_unsubscribe(const std::string& id) {
  std::lock_guard lk(nbiMutex_);
  return nbiSubs_.erase(id) > 0;
}

AbnormalBehaviourNotification NwdafService::run_engine_for(const AnalyticsSubscription& sub,
                                                           util::SysTime now, bool& ok) {
  AbnormalBehaviourNotification n;
  n.subscriptionId = sub.subscriptionId;
  n.timeStamp = now;
  ok = false;

  AnalyticsEngine* engine = nullptr;
  {
    std::lock_guard lk(hooksMutex_);
    auto it = engines_.find(sub.eventId);
    if (it != engines_.end()) engine = it->second;
  }
  if (!engine) return n;

  // cumulative window: everything stored so far
  const util::SysTime start = store_->earliest_timestamp().value_or(now);
  AnalysisOutcome outcome = engine->analyze(start, now);
  if (outcome.status != AnalysisOutcome::Status::Ok) {
    engineErrors_.fetch_add(1);
    return n;
  }
  ok = true;
  for (const DetectionResult& r : outcome.results) {
    if (!r.anomalous) continue;
    if (sub.exceptionIds && !sub.exceptionIds->count(r.excepId)) continue;
    ExceptionItem item;
    item.excepId = r.excepId;
    item.ueIpv4Addrs.push_back(r.ueIpv4Addr);
    item.confidence = r.confidence;
    n.exceptions.push_back(std::move(item));
  }
  return n;
}

void NwdafService::dispatch_loop() {
  while (!stopping_.load()) {
    const util::SysTime now = util::now_sys();
    std::vector<std::pair<AnalyticsSubscription, util::SysTime>> due;
    {
      std::lock_guard lk(nbiMutex_);
      for (auto& [id, entry] : nbiSubs_) {
        if (util::seconds_between(entry.lastDispatch, now) >=
            static_cast<double>(entry.sub.periodSeconds)) {
          due.emplace_back(entry.sub, entry.lastDispatch);
          entry.lastDispatch = now;
        }
      }
    }

    std::vector<PendingDelivery> batch;
    {
      std::lock_guard lk(nbiMutex_);
      batch.swap(retryQueue_);
    }
    for (const auto& [sub, _] : due) {
      bool ok = false;
      AbnormalBehaviourNotification n = run_engine_for(sub, now, ok);
      if (!ok) continue;  // engine failure: skip this tick
      batch.push_back(PendingDelivery{sub.notifyUri, encode_abnormal_notification(n), 0});
    }

    for (PendingDelivery& d : batch) {
      auto uri = util::parse_http_uri(d.notifyUri);
      bool sent = false;
      if (uri) {
        httplib::Client client(uri->host, uri->port);
        client.set_connection_timeout(0, cfg_.deliveryTimeoutMs * 1000);
        client.set_read_timeout(0, cfg_.deliveryTimeoutMs * 1000);
        auto res = client.Post(uri->path, d.body, "application/json");
        sent = res && res->status < 300;
      }
      if (!sent) {
        d.attempts += 1;
        if (d.attempts < 2) {
          std::lock_guard lk(nbiMutex_);
          retryQueue_.push_back(std::move(d));
        } else {
          util::log_warn("nwdaf", "dropping analytics notification to " + d.notifyUri);
        }
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.dispatchIntervalMs));
  }
}

void NwdafService::sbi_subscribe_loop() {
  auto upf = util::parse_http_uri(cfg_.upfUri);
  if (!upf) {
    util::log_error("nwdaf", "bad upf_uri: " + cfg_.upfUri);
    return;
  }
  double backoff = 0.5;
  while (!stopping_.load()) {
    ees::SubscriptionRequest req;
    req.eventTypes = {ees::EventType::UserDataUsageMeasures};
    req.measurementTypes = {ees::MeasurementType::Volume, ees::MeasurementType::Throughput};
    req.granularity = ees::Granularity::PerFlow;
    req.reporting.periodSeconds = static_cast<uint32_t>(cfg_.collectionPeriodS);
    req.notifyUri = base_uri() + "/sbi/notify";

    httplib::Client client(upf->host, upf->port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Post("/nupf-ee/v1/ee-subscriptions", ees::encode_subscription_request(req),
                           "application/json");
    if (res && res->status == 201) {
      try {
        auto resp = ees::decode_subscription_response(res->body);
        {
          std::lock_guard lk(sbiMutex_);
          sbiSubscriptionId_ = resp.subscriptionId;
        }
        sbiSubscribed_.store(true);
        util::log_info("nwdaf", "EES subscription " + resp.subscriptionId + " established");
        return;
      } catch (const ees::CodecError& e) {
        util::log_warn("nwdaf", std::string("bad subscription response: ") + e.what());
      }
    }
    // exponential backoff, capped at 30 s
    for (double waited = 0; waited < backoff && !stopping_.load(); waited += 0.1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    backoff = std::min(backoff * 2, 30.0);
  }
}

void NwdafService::subscribe_to_ml_provision() {
  auto uri = util::parse_http_uri(cfg_.mlProvisionUri);
  if (!uri) return;
  httplib::Client client(uri->host, uri->port);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  json body{{"eventId", "ABNORMAL_BEHAVIOUR"}, {"notifyUri", base_uri() + "/ml/notify"}};
  auto res = client.Post("/nnwdaf-mlmodelprovision/v1/subscriptions", body.dump(),
                         "application/json");
  if (!res || res->status >= 300) {
    util::log_warn("nwdaf", "model provisioning subscription failed");
    return;
  }
  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("current")) return;  // pending until registration
  ModelEndpoint ep;
  ep.inferenceUri = j["current"].value("inferenceUri", "");
  ep.name = j["current"]["model"].value("name", "");
  ep.version = j["current"]["model"].value("version", 0);
  if (j["current"]["model"].contains("featureSchema")) {
    ep.featureSchema = j["current"]["model"]["featureSchema"].get<std::vector<std::string>>();
  }
  std::function<void(const ModelEndpoint&)> handler;
  {
    std::lock_guard lk(hooksMutex_);
    handler = modelHandler_;
  }
  if (handler && !ep.inferenceUri.empty()) handler(ep);
}

bool NwdafService::start() {
  auto& server = impl_->server;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/sbi/notify", [this](const httplib::Request& req, httplib::Response& res) {
    StoredUsageReport r;
    try {
      r.notification = ees::decode_notification(req.body);
    } catch (const ees::CodecError& e) {
      return reply_error(res, 400, "SCHEMA_VIOLATION", e.what());
    }
    r.receivedAt = util::now_sys();
    r.sourceUpf = cfg_.sourceUpfId;
    const bool fresh = store_->append(r);  // fsync'd before we acknowledge
    if (fresh) {
      std::function<void(const StoredUsageReport&)> observer;
      {
        std::lock_guard lk(hooksMutex_);
        observer = reportObserver_;
      }
      if (observer) observer(r);
    }
    res.status = 204;
  });

  server.Get("/sbi/status", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"subscribed", sbiSubscribed_.load()},
                         {"subscriptionId", sbi_subscription_id()},
                         {"storedReports", store_->size()}}
                        .dump(),
                    "application/json");
  });

  server.Get("/store/reports", [this](const httplib::Request& req, httplib::Response& res) {
    util::SysTime start = util::from_unix_ms(0);
    util::SysTime end = util::from_unix_ms(4102444800000);  // year 2100
    try {
      if (req.has_param("start")) start = util::parse_rfc3339(req.get_param_value("start"));
      if (req.has_param("end")) end = util::parse_rfc3339(req.get_param_value("end"));
    } catch (const std::invalid_argument& e) {
      return reply_error(res, 400, "BAD_WINDOW", e.what());
    }
    if (start > end) return reply_error(res, 400, "BAD_WINDOW", "start after end");
    std::optional<std::string> ue;
    if (req.has_param("ue")) ue = req.get_param_value("ue");
    json out = json::array();
    for (const StoredUsageReport& r : store_->query(start, end, ue)) {
      out.push_back(json{{"receivedAt", util::format_rfc3339(r.receivedAt)},
                         {"sourceUpf", r.sourceUpf},
                         {"notification", json::parse(ees::encode_notification(r.notification))}});
    }
    res.set_content(out.dump(), "application/json");
  });

  server.Post("/nnwdaf-eventssubscription/v1/subscriptions",
              [this](const httplib::Request& req, httplib::Response& res) {
                AnalyticsSubscription sub;
                try {
                  sub = decode_analytics_subscription(req.body);
                } catch (const ees::CodecError& e) {
                  if (e.kind() == ees::CodecErrorKind::UnknownEnumToken && e.field() == "eventId") {
                    return reply_error(res, 400, "UNSUPPORTED_EVENT_ID", e.what());
                  }
                  return reply_error(res, 400, "SCHEMA_VIOLATION", e.what());
                }
                const std::string id = nbi_subscribe(sub);
                res.status = 201;
                res.set_content(json{{"subscriptionId", id}}.dump(), "application/json");
              });

  server.Delete(R"(/nnwdaf-eventssubscription/v1/subscriptions/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  if (!nbi_unsubscribe(req.matches[1])) {
                    return reply_error(res, 404, "UNKNOWN_SUBSCRIPTION", req.matches[1]);
                  }
                  res.status = 204;
                });

  server.Get("/nnwdaf-analyticsinfo/v1/analytics",
             [this](const httplib::Request& req, httplib::Response& res) {
               const std::string eventId = req.get_param_value("event-id");
               if (!analytics_event_from_token(eventId)) {
                 return reply_error(res, 400, "UNSUPPORTED_EVENT_ID", eventId);
               }
               AnalyticsSubscription oneShot;
               oneShot.eventId = *analytics_event_from_token(eventId);
               oneShot.subscriptionId = "oneshot";
               oneShot.notifyUri = "http://127.0.0.1:1/unused";
               bool ok = false;
               AbnormalBehaviourNotification n = run_engine_for(oneShot, util::now_sys(), ok);
               if (!ok) return reply_error(res, 503, "ENGINE_UNAVAILABLE", "analysis failed");
               res.set_content(encode_abnormal_notification(n), "application/json");
             });

  server.Post("/ml/notify", [this](const httplib::Request& req, httplib::Response& res) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("inferenceUri")) {
      return reply_error(res, 400, "MALFORMED_JSON", "inferenceUri required");
    }
    ModelEndpoint ep;
    ep.inferenceUri = j.value("inferenceUri", "");
    if (j.contains("model") && j["model"].is_object()) {
      ep.name = j["model"].value("name", "");
      ep.version = j["model"].value("version", 0);
      if (j["model"].contains("featureSchema")) {
        ep.featureSchema = j["model"]["featureSchema"].get<std::vector<std::string>>();
      }
    }
    std::function<void(const ModelEndpoint&)> handler;
    {
      std::lock_guard lk(hooksMutex_);
      handler = modelHandler_;
    }
    if (handler) handler(ep);
    res.status = 204;
  });

  server.Get("/engine/detections", [this](const httplib::Request&, httplib::Response& res) {
    std::function<std::string()> provider;
    {
      std::lock_guard lk(hooksMutex_);
      provider = detectionLogProvider_;
    }
    res.set_content(provider ? provider() : "[]", "application/json");
  });

  if (cfg_.port == 0) {
    port_ = server.bind_to_any_port(cfg_.listenAddr);
    if (port_ <= 0) return false;
  } else {
    if (!server.bind_to_port(cfg_.listenAddr, cfg_.port)) return false;
    port_ = cfg_.port;
  }
  serverThread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();

  if (!cfg_.upfUri.empty()) sbiThread_ = std::thread([this] { sbi_subscribe_loop(); });
  if (!cfg_.mlProvisionUri.empty()) subscribe_to_ml_provision();
  dispatchThread_ = std::thread([this] { dispatch_loop(); });
  return true;
}

void NwdafService::stop() {
  stopping_.store(true);
  if (sbiThread_.joinable()) sbiThread_.join();
  if (dispatchThread_.joinable()) dispatchThread_.join();
  if (serverThread_.joinable()) {
    impl_->server.stop();
    serverThread_.join();
  }
}

}  // namespace cloop::nwdaf
