#include "cloop/upf/service.hpp"

#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/framing.hpp"
#include "cloop/util/log.hpp"
#include "cloop/util/toml.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::upf {

using nlohmann::json;

struct UpfService::Impl {
  httplib::Server server;
};

UpfServiceConfig load_upf_config(const std::string& tomlPath) {
  util::toml::Document doc = util::toml::parse_file(tomlPath);
  UpfServiceConfig cfg;
  cfg.listenAddr = util::toml::get_string(doc.root, "listen_addr", "127.0.0.1");
  cfg.eePort = static_cast<int>(util::toml::get_int(doc.root, "ee_port", 0));
  cfg.ingestPort = static_cast<int>(util::toml::get_int(doc.root, "ingest_port", 0));
  cfg.options.dnn = util::toml::get_string(doc.root, "dnn", cfg.options.dnn);
  cfg.options.upfId = util::toml::get_string(doc.root, "upf_id", cfg.options.upfId);
  return cfg;
}

namespace {

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& detail) {
  res.status = status;
  res.set_content(json{{"error", code}, {"detail", detail}}.dump(), "application/json");
}

void reply_codec_error(httplib::Response& res, const ees::CodecError& e) {
  const char* code = "SCHEMA_VIOLATION";
  switch (e.kind()) {
    case ees::CodecErrorKind::MalformedJson: code = "MALFORMED_JSON"; break;
    case ees::CodecErrorKind::UnknownEnumToken: code = "UNKNOWN_ENUM_TOKEN"; break;
    case ees::CodecErrorKind::InvariantViolation: code = "INVARIANT_VIOLATION"; break;
    case ees::CodecErrorKind::SchemaViolation: break;
  }
  reply_error(res, 400, code, e.what());
}

}  // namespace

UpfService::UpfService(UpfServiceConfig cfg)
    : cfg_(std::move(cfg)), upf_(cfg_.options), impl_(std::make_unique<Impl>()) {}

UpfService::~UpfService() { stop(); }

std::string UpfService::base_uri() const {
  return "http://" + cfg_.listenAddr + ":" + std::to_string(eePort_);
}

bool UpfService::start() {
  auto& server = impl_->server;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/nupf-ee/v1/ee-subscriptions",
              [this](const httplib::Request& req, httplib::Response& res) {
                ees::SubscriptionRequest parsed;
                try {
                  parsed = ees::decode_subscription_request(req.body);
                } catch (const ees::CodecError& e) {
                  return reply_codec_error(res, e);
                }
                auto resp = upf_.subscribe(parsed);
                if (!resp) {
                  return reply_error(res, 400, "ALL_EVENTS_UNSUPPORTED",
                                     "no requested event type is available");
                }
                res.status = 201;
                res.set_header("Location",
                               "/nupf-ee/v1/ee-subscriptions/" + resp->subscriptionId);
                res.set_content(ees::encode_subscription_response(*resp), "application/json");
              });

  server.Delete(R"(/nupf-ee/v1/ee-subscriptions/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  if (!upf_.unsubscribe(req.matches[1])) {
                    return reply_error(res, 404, "UNKNOWN_SUBSCRIPTION", req.matches[1]);
                  }
                  res.status = 204;
                });

  server.Post("/n4/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("pduSessionId") ||
        !j.contains("ueIpv4Addr")) {
      return reply_error(res, 400, "MALFORMED_JSON", "pduSessionId and ueIpv4Addr required");
    }
    ees::SnssaiId snssai;
    if (j.contains("snssai") && j["snssai"].is_object()) {
      snssai.sst = j["snssai"].value("sst", 1);
      snssai.sd = j["snssai"].value("sd", "000001");
      if (snssai.sd.size() == 5) snssai.sd.insert(snssai.sd.begin(), '0');
    }
    if (!upf_.add_session(j["pduSessionId"].get<int64_t>(), j["ueIpv4Addr"].get<std::string>(),
                          snssai)) {
      return reply_error(res, 409, "SESSION_EXISTS", "pduSessionId already provisioned");
    }
    res.status = 201;
    res.set_content(json{{"status", "ACTIVE"}}.dump(), "application/json");
  });

  server.Post(R"(/n4/v1/sessions/(\d+)/release)",
              [this](const httplib::Request& req, httplib::Response& res) {
                const int64_t id = std::stoll(req.matches[1]);
                switch (upf_.release_session(id)) {
                  case Upf::ReleaseResult::Released:
                    res.set_content(json{{"status", "RELEASED"}, {"alreadyReleased", false}}.dump(),
                                    "application/json");
                    return;
                  case Upf::ReleaseResult::AlreadyReleased:
                    res.set_content(json{{"status", "RELEASED"}, {"alreadyReleased", true}}.dump(),
                                    "application/json");
                    return;
                  case Upf::ReleaseResult::UnknownSession:
                    return reply_error(res, 404, "UNKNOWN_SESSION", req.matches[1]);
                }
              });

  server.Get("/n4/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const PduSessionInfo& s : upf_.sessions()) {
      out.push_back(json{{"pduSessionId", s.pduSessionId},
                         {"ueIpv4Addr", s.ueIpv4Addr},
                         {"state", s.released ? "RELEASED" : "ACTIVE"}});
    }
    res.set_content(out.dump(), "application/json");
  });

  server.Get(R"(/stats/sessions/(\d+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    const int64_t id = std::stoll(req.matches[1]);
    if (!upf_.session(id)) return reply_error(res, 404, "UNKNOWN_SESSION", req.matches[1]);
    const SessionTraffic t = upf_.session_traffic(id);
    res.set_content(json{{"ulBytes", t.ulBytes},
                         {"dlBytes", t.dlBytes},
                         {"ulPackets", t.ulPackets},
                         {"dlPackets", t.dlPackets},
                         {"droppedPackets", t.droppedPackets}}
                        .dump(),
                    "application/json");
  });

  if (cfg_.eePort == 0) {
    eePort_ = server.bind_to_any_port(cfg_.listenAddr);
    if (eePort_ <= 0) return false;
  } else {
    if (!server.bind_to_port(cfg_.listenAddr, cfg_.eePort)) return false;
    eePort_ = cfg_.eePort;
  }
  serverThread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();

  if (cfg_.ingestPort >= 0) {
    listenFd_ = util::tcp_listen(cfg_.listenAddr, cfg_.ingestPort, &ingestPort_);
    if (listenFd_ < 0) {
      stop();
      return false;
    }
    ingestThread_ = std::thread([this] { ingest_listener_loop(); });
  }

  notifierThread_ = std::thread([this] { notifier_loop(); });
  return true;
}

void UpfService::stop() {
  if (stopping_.exchange(true)) {
    // already stopped; nothing left to join
  }
  if (listenFd_ >= 0) {
    ::shutdown(listenFd_, SHUT_RDWR);
    ::close(listenFd_);
    listenFd_ = -1;
  }
  if (ingestThread_.joinable()) ingestThread_.join();
  {
    std::lock_guard lk(connMutex_);
    for (std::thread& t : connThreads_) {
      if (t.joinable()) t.join();
    }
    connThreads_.clear();
  }
  if (notifierThread_.joinable()) notifierThread_.join();
  if (serverThread_.joinable()) {
    impl_->server.stop();
    serverThread_.join();
  }
}

void UpfService::deliver(OutboundNotification&& n, std::vector<OutboundNotification>& retryOut) {
  auto uri = util::parse_http_uri(n.notifyUri);
  if (!uri) {
    deliveryFailures_.fetch_add(1);
    return;
  }
  httplib::Client client(uri->host, uri->port);
  client.set_connection_timeout(0, cfg_.deliveryTimeoutMs * 1000);
  client.set_read_timeout(0, cfg_.deliveryTimeoutMs * 1000);
  client.set_write_timeout(0, cfg_.deliveryTimeoutMs * 1000);
  auto res = client.Post(uri->path, ees::encode_notification(n.notification), "application/json");
  if (res && res->status < 300) {
    delivered_.fetch_add(1);
    return;
  }
  deliveryFailures_.fetch_add(1);
  n.attempts += 1;
  if (n.attempts < 2) {
    util::log_warn("upf", "notification delivery to " + n.notifyUri + " failed, will retry once");
    retryOut.push_back(std::move(n));
  } else {
    util::log_warn("upf", "notification to " + n.notifyUri + " dropped after retry");
  }
}

void UpfService::notifier_loop() {
  while (!stopping_.load()) {
    std::vector<OutboundNotification> batch = upf_.notifier_tick(util::now_sys());
    {
      std::lock_guard lk(retryMutex_);
      for (auto& n : retryQueue_) batch.push_back(std::move(n));
      retryQueue_.clear();
    }
    std::vector<OutboundNotification> retries;
    for (auto& n : batch) deliver(std::move(n), retries);
    if (!retries.empty()) {
      std::lock_guard lk(retryMutex_);
      for (auto& n : retries) retryQueue_.push_back(std::move(n));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.notifierIntervalMs));
  }
}

void UpfService::ingest_listener_loop() {
  while (!stopping_.load()) {
    int fd = ::accept(listenFd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) return;
      continue;
    }
    std::lock_guard lk(connMutex_);
    connThreads_.emplace_back([this, fd] { ingest_connection(fd); });
  }
}

void UpfService::ingest_connection(int fd) {
  while (!stopping_.load()) {
    auto frame = util::read_frame(fd, 200);
    if (!frame) {
      if (stopping_.load()) break;
      // distinguish timeout from EOF by peeking: read_frame returns nullopt
      // for both; poll again unless the peer is gone
      char probe;
      const ssize_t r = ::recv(fd, &probe, 1, MSG_PEEK | MSG_DONTWAIT);
      if (r == 0) break;  // orderly shutdown
      if (r < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) break;
      continue;
    }
    PacketDescriptor p;
    try {
      p = decode_packet_descriptor(*frame);
    } catch (const ees::CodecError& e) {
      util::write_frame(fd, json{{"error", "BAD_DESCRIPTOR"}, {"detail", e.what()}}.dump());
      continue;
    }
    if (!upf_.session(p.pduSessionId)) {
      util::write_frame(fd, json{{"error", "UNKNOWN_SESSION"}}.dump());
      continue;
    }
    const ForwardDecision decision = upf_.ingest_packet(p);
    if (p.kind == PacketKind::Probe && decision == ForwardDecision::Forwarded) {
      util::write_frame(fd, *frame);  // simulated ping echo
    }
  }
  ::close(fd);
}

}  // namespace cloop::upf
