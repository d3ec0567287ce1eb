#include "cloop/smf/smf.hpp"

#include <httplib.h>
#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/log.hpp"
#include "cloop/util/toml.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::smf {

using nlohmann::json;

Smf::Smf(std::vector<UeSessionBinding> bindings, ReleaseFn release) : release_(std::move(release)) {
  for (UeSessionBinding& b : bindings) bindings_.emplace(b.ueIpv4Addr, b);
}

std::vector<MitigationAction> Smf::handle_notification(
    const nwdaf::AbnormalBehaviourNotification& n) {
  std::lock_guard lk(mutex_);  // one notification at a time
  std::vector<MitigationAction> actions;
  for (const nwdaf::ExceptionItem& item : n.exceptions) {
    for (const std::string& ue : item.ueIpv4Addrs) {
      auto it = bindings_.find(ue);
      if (it == bindings_.end()) {
        util::log_warn("smf", "notification names unknown UE " + ue + ", skipped");
        continue;
      }
      UeSessionBinding& binding = it->second;
      if (binding.released) continue;  // already mitigated
      ++releaseCalls_;
      MitigationAction action;
      action.ueIpv4Addr = ue;
      action.pduSessionId = binding.pduSessionId;
      action.releaseSucceeded = release_ && release_(binding.pduSessionId);
      if (action.releaseSucceeded) {
        binding.released = true;
        binding.releasedAt = util::now_sys();
        if (observer_) observer_(binding);
      } else {
        util::log_warn("smf", "UPF release failed for UE " + ue + ", will retry on next report");
      }
      actions.push_back(std::move(action));
    }
  }
  return actions;
}

std::vector<UeSessionBinding> Smf::bindings() const {
  std::lock_guard lk(mutex_);
  std::vector<UeSessionBinding> out;
  for (const auto& [_, b] : bindings_) out.push_back(b);
  return out;
}

std::optional<UeSessionBinding> Smf::binding(const std::string& ue) const {
  std::lock_guard lk(mutex_);
  auto it = bindings_.find(ue);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

size_t Smf::release_calls() const {
  std::lock_guard lk(mutex_);
  return releaseCalls_;
}

void Smf::set_release_observer(std::function<void(const UeSessionBinding&)> observer) {
  std::lock_guard lk(mutex_);
  observer_ = std::move(observer);
}

// ---------------------------------------------------------------------------

SmfConfig load_smf_config(const std::string& tomlPath) {
  util::toml::Document doc = util::toml::parse_file(tomlPath);
  SmfConfig cfg;
  std::string addr = util::toml::get_string(doc.root, "listen_addr", "127.0.0.1:0");
  const size_t colon = addr.rfind(':');
  if (colon != std::string::npos) {
    cfg.listenAddr = addr.substr(0, colon);
    cfg.port = std::stoi(addr.substr(colon + 1));
  } else {
    cfg.listenAddr = addr;
  }
  cfg.nwdafUri = util::toml::get_string(doc.root, "nwdaf_uri", "");
  cfg.upfUri = util::toml::get_string(doc.root, "upf_uri", "");
  cfg.reportPeriodS = static_cast<int>(util::toml::get_int(doc.root, "report_period_s", 1));
  auto it = doc.arrays.find("sessions");
  if (it != doc.arrays.end()) {
    for (const util::toml::Table& t : it->second) {
      UeSessionBinding b;
      b.ueIpv4Addr = util::toml::require_string(t, "ue_ipv4_addr");
      b.pduSessionId = util::toml::require_int(t, "pdu_session_id");
      cfg.sessions.push_back(std::move(b));
    }
  }
  return cfg;
}

struct SmfService::Impl {
  httplib::Server server;
};

SmfService::SmfService(SmfConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  auto upf = util::parse_http_uri(cfg_.upfUri);
  Smf::ReleaseFn release = [upf](int64_t sessionId) {
    if (!upf) return false;
    httplib::Client client(upf->host, upf->port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Post("/n4/v1/sessions/" + std::to_string(sessionId) + "/release", "",
                           "application/json");
    return res && res->status < 300;
  };
  core_ = std::make_unique<Smf>(cfg_.sessions, std::move(release));
}

SmfService::~SmfService() { stop(); }

std::string SmfService::base_uri() const {
  return "http://" + cfg_.listenAddr + ":" + std::to_string(port_);
}

std::string SmfService::subscription_id() const {
  std::lock_guard lk(subMutex_);
  return subscriptionId_;
}

void SmfService::subscribe_loop() {
  auto nwdaf = util::parse_http_uri(cfg_.nwdafUri);
  if (!nwdaf) {
    util::log_error("smf", "bad nwdaf_uri: " + cfg_.nwdafUri);
    return;
  }
  double backoff = 0.5;
  while (!stopping_.load()) {
    if (subscribed_.load()) return;  // duplicate start keeps the single subscription
    nwdaf::AnalyticsSubscription sub;
    sub.eventId = nwdaf::AnalyticsEventId::AbnormalBehaviour;
    sub.exceptionIds = cfg_.exceptionFilter;
    sub.notifyUri = base_uri() + "/smf/notify";
    sub.periodSeconds = static_cast<uint32_t>(cfg_.reportPeriodS);

    httplib::Client client(nwdaf->host, nwdaf->port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto res = client.Post("/nnwdaf-eventssubscription/v1/subscriptions",
                           nwdaf::encode_analytics_subscription(sub), "application/json");
    if (res && res->status == 201) {
      json j = json::parse(res->body, nullptr, false);
      if (!j.is_discarded() && j.contains("subscriptionId")) {
        {
          std::lock_guard lk(subMutex_);
          subscriptionId_ = j["subscriptionId"].get<std::string>();
        }
        subscribed_.store(true);
        util::log_info("smf", "NWDAF subscription " + subscriptionId_ + " active");
        return;
      }
    }
    for (double waited = 0; waited < backoff && !stopping_.load(); waited += 0.1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    backoff = std::min(backoff * 2, 30.0);
  }
}

bool SmfService::start() {
  auto& server = impl_->server;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/smf/notify", [this](const httplib::Request& req, httplib::Response& res) {
    nwdaf::AbnormalBehaviourNotification n;
    try {
      n = nwdaf::decode_abnormal_notification(req.body);
    } catch (const ees::CodecError& e) {
      res.status = 400;
      res.set_content(json{{"error", "SCHEMA_VIOLATION"}, {"detail", e.what()}}.dump(),
                      "application/json");
      return;
    }
    auto actions = core_->handle_notification(n);
    json out = json::array();
    for (const MitigationAction& a : actions) {
      out.push_back(json{{"ueIpv4Addr", a.ueIpv4Addr},
                         {"pduSessionId", a.pduSessionId},
                         {"releaseSucceeded", a.releaseSucceeded}});
    }
    res.set_content(json{{"actions", out}}.dump(), "application/json");
  });

  server.Get("/smf/status", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        json{{"subscribed", subscribed_.load()}, {"subscriptionId", subscription_id()}}.dump(),
        "application/json");
  });

  server.Get("/smf/bindings", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const UeSessionBinding& b : core_->bindings()) {
      json entry{{"ueIpv4Addr", b.ueIpv4Addr},
                 {"pduSessionId", b.pduSessionId},
                 {"state", b.released ? "RELEASED" : "ACTIVE"}};
      if (b.releasedAt) entry["releasedAt"] = util::format_rfc3339(*b.releasedAt);
      out.push_back(std::move(entry));
    }
    res.set_content(out.dump(), "application/json");
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

  if (!cfg_.nwdafUri.empty()) subscribeThread_ = std::thread([this] { subscribe_loop(); });
  return true;
}

void SmfService::stop() {
  stopping_.store(true);
  if (subscribeThread_.joinable()) subscribeThread_.join();
  if (serverThread_.joinable()) {
    impl_->server.stop();
    serverThread_.join();
  }
}

}  // namespace cloop::smf
