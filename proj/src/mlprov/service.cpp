#include "cloop/mlprov/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "cloop/util/log.hpp"
#include "cloop/util/toml.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::mlprov {

using nlohmann::json;

struct MlProvisionService::Impl {
  httplib::Server server;
};

MlServiceConfig load_mlprov_config(const std::string& tomlPath) {
  util::toml::Document doc = util::toml::parse_file(tomlPath);
  MlServiceConfig cfg;
  cfg.registryDir = util::toml::get_string(doc.root, "registry_dir", "models");
  std::string addr = util::toml::get_string(doc.root, "listen_addr", "127.0.0.1:0");
  const size_t colon = addr.rfind(':');
  if (colon != std::string::npos) {
    cfg.listenAddr = addr.substr(0, colon);
    cfg.port = std::stoi(addr.substr(colon + 1));
  } else {
    cfg.listenAddr = addr;
  }
  return cfg;
}

namespace {

json descriptor_json(const ModelDescriptor& d) {
  return json{{"name", d.name},
              {"version", d.version},
              {"eventId", d.eventId},
              {"featureSchema", d.featureSchema},
              {"createdAt", util::format_rfc3339(d.createdAt)},
              {"metrics", d.metrics}};
}

void reply_error(httplib::Response& res, int status, const std::string& cause) {
  res.status = status;
  res.set_content(json{{"error", cause}}.dump(), "application/json");
}

}  // namespace

MlProvisionService::MlProvisionService(MlServiceConfig cfg)
    : cfg_(std::move(cfg)), registry_(cfg_.registryDir), impl_(std::make_unique<Impl>()) {}

MlProvisionService::~MlProvisionService() { stop(); }

std::string MlProvisionService::base_uri() const {
  return "http://" + cfg_.listenAddr + ":" + std::to_string(port_);
}

std::string MlProvisionService::inference_uri(const ModelDescriptor& d) const {
  return base_uri() + "/models/" + d.name + "/" + std::to_string(d.version) + ":infer";
}

bool MlProvisionService::subscription_matches(const MlSubscription& s,
                                              const ModelDescriptor& d) const {
  if (s.eventId != d.eventId) return false;
  for (const auto& [k, v] : s.filters) {
    if (k == "name" && d.name != v) return false;
    if (k == "version" && std::to_string(d.version) != v) return false;
  }
  return true;
}

void MlProvisionService::notify_subscribers(const ModelDescriptor& d) {
  std::vector<MlSubscription> matching;
  {
    std::lock_guard<std::mutex> lk(subsMutex_);
    for (const MlSubscription& s : subscriptions_) {
      if (subscription_matches(s, d)) matching.push_back(s);
    }
  }
  for (const MlSubscription& s : matching) {
    auto uri = util::parse_http_uri(s.notifyUri);
    if (!uri) continue;
    httplib::Client client(uri->host, uri->port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    json body{{"subscriptionId", s.subscriptionId},
              {"model", descriptor_json(d)},
              {"inferenceUri", inference_uri(d)}};
    auto res = client.Post(uri->path, body.dump(), "application/json");
    if (!res || res->status >= 300) {
      util::log_warn("mlprov", "model update notification to " + s.notifyUri + " failed");
    } else {
      notificationsSent_.fetch_add(1);
    }
  }
}

ModelDescriptor MlProvisionService::register_model(ForestModel model) {
  ModelDescriptor d = registry_.register_model(std::move(model));
  notify_subscribers(d);
  return d;
}

std::shared_ptr<const ForestModel> MlProvisionService::cached_model(const std::string& name,
                                                                    int version) {
  {
    std::lock_guard<std::mutex> lk(cacheMutex_);
    auto it = cache_.find({name, version});
    if (it != cache_.end()) return it->second;
  }
  auto loaded = registry_.load(name, version);
  if (!loaded) return nullptr;
  auto ptr = std::make_shared<const ForestModel>(std::move(*loaded));
  std::lock_guard<std::mutex> lk(cacheMutex_);
  cache_[{name, version}] = ptr;
  return ptr;
}

void MlProvisionService::setup_routes() {
  auto& server = impl_->server;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/nnwdaf-mlmodelprovision/v1/subscriptions",
              [this](const httplib::Request& req, httplib::Response& res) {
                json j = json::parse(req.body, nullptr, false);
                if (j.is_discarded() || !j.is_object()) {
                  return reply_error(res, 400, "malformed JSON");
                }
                if (!j.contains("eventId") || !j["eventId"].is_string() ||
                    !j.contains("notifyUri") || !j["notifyUri"].is_string()) {
                  return reply_error(res, 400, "eventId and notifyUri required");
                }
                MlSubscription sub;
                sub.eventId = j["eventId"].get<std::string>();
                sub.notifyUri = j["notifyUri"].get<std::string>();
                if (!util::parse_http_uri(sub.notifyUri)) {
                  return reply_error(res, 400, "notifyUri must be absolute http URI");
                }
                if (j.contains("filters") && j["filters"].is_object()) {
                  for (auto& [k, v] : j["filters"].items()) {
                    if (v.is_string()) sub.filters[k] = v.get<std::string>();
                  }
                }
                {
                  std::lock_guard<std::mutex> lk(subsMutex_);
                  sub.subscriptionId = "mlsub-" + std::to_string(nextSubId_++);
                  subscriptions_.push_back(sub);
                }
                json out{{"subscriptionId", sub.subscriptionId}};
                // newest matching model, if any, rides back in the response
                auto models = registry_.query(sub.eventId, sub.filters);
                if (!models.empty()) {
                  out["current"] = json{{"model", descriptor_json(models.front())},
                                        {"inferenceUri", inference_uri(models.front())}};
                }
                res.status = 201;
                res.set_content(out.dump(), "application/json");
              });

  server.Delete(R"(/nnwdaf-mlmodelprovision/v1/subscriptions/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  std::lock_guard<std::mutex> lk(subsMutex_);
                  auto it = std::find_if(subscriptions_.begin(), subscriptions_.end(),
                                         [&](const MlSubscription& s) { return s.subscriptionId == id; });
                  if (it == subscriptions_.end()) return reply_error(res, 404, "unknown subscription");
                  subscriptions_.erase(it);
                  res.status = 204;
                });

  server.Post("/admin/models", [this](const httplib::Request& req, httplib::Response& res) {
    ForestModel model;
    try {
      model = forest_from_json(req.body);
    } catch (const std::invalid_argument& e) {
      return reply_error(res, 400, e.what());
    }
    ModelDescriptor d = register_model(std::move(model));
    res.status = 201;
    res.set_content(json{{"model", descriptor_json(d)}, {"inferenceUri", inference_uri(d)}}.dump(),
                    "application/json");
  });

  server.Get("/models", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string eventId = req.get_param_value("event-id");
    if (eventId.empty()) return reply_error(res, 400, "event-id required");
    std::map<std::string, std::string> filters;
    if (req.has_param("name")) filters["name"] = req.get_param_value("name");
    if (req.has_param("version")) filters["version"] = req.get_param_value("version");
    json models = json::array();
    for (const ModelDescriptor& d : registry_.query(eventId, filters)) {
      models.push_back(descriptor_json(d));
    }
    res.set_content(json{{"models", models}}.dump(), "application/json");
  });

  server.Post(R"(/models/([^/]+)/(\d+):infer)",
              [this](const httplib::Request& req, httplib::Response& res) {
                const std::string name = req.matches[1];
                const int version = std::stoi(req.matches[2]);
                auto model = cached_model(name, version);
                if (!model) return reply_error(res, 404, "unknown model");
                json j = json::parse(req.body, nullptr, false);
                if (j.is_discarded() || !j.is_object() || !j.contains("features") ||
                    !j["features"].is_array()) {
                  return reply_error(res, 400, "expected {\"features\": [[...]]}");
                }
                const size_t width = model->descriptor.featureSchema.size();
                std::vector<std::vector<double>> rows;
                for (const json& rj : j["features"]) {
                  if (!rj.is_array() || rj.size() != width) {
                    return reply_error(res, 400, "feature width mismatch");
                  }
                  std::vector<double> row;
                  for (const json& v : rj) {
                    if (!v.is_number()) return reply_error(res, 400, "non-numeric feature");
                    row.push_back(v.get<double>());
                  }
                  rows.push_back(std::move(row));
                }
                json labels = json::array();
                json shares = json::array();
                for (const auto& row : rows) {
                  auto [label, share] = model->predict_row(row);
                  labels.push_back(label);
                  shares.push_back(share);
                }
                res.set_content(json{{"labels", labels},
                                     {"voteShares", shares},
                                     {"model", {{"name", name}, {"version", version}}}}
                                    .dump(),
                                "application/json");
              });
}

bool MlProvisionService::start() {
  setup_routes();
  auto& server = impl_->server;
  if (cfg_.port == 0) {
    port_ = server.bind_to_any_port(cfg_.listenAddr);
    if (port_ <= 0) return false;
  } else {
    if (!server.bind_to_port(cfg_.listenAddr, cfg_.port)) return false;
    port_ = cfg_.port;
  }
  serverThread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return true;
}

void MlProvisionService::stop() {
  if (serverThread_.joinable()) {
    impl_->server.stop();
    serverThread_.join();
  }
}

}  // namespace cloop::mlprov
