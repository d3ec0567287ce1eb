#include "cloop/engine/engine.hpp"

#include <algorithm>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "cloop/util/log.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::engine {

using nlohmann::json;
using nwdaf::AnalysisOutcome;

BotDetectionEngine::BotDetectionEngine(const nwdaf::ReportStore* store, BotEngineConfig cfg)
    : store_(store), cfg_(cfg) {}

void BotDetectionEngine::set_model_endpoint(const nwdaf::ModelEndpoint& endpoint) {
  std::lock_guard lk(mutex_);
  endpoint_ = endpoint;
  util::log_info("engine", "inference endpoint -> " + endpoint.inferenceUri);
}

bool BotDetectionEngine::has_model() const {
  std::lock_guard lk(mutex_);
  return endpoint_.has_value();
}

std::optional<nwdaf::ModelEndpoint> BotDetectionEngine::model_endpoint() const {
  std::lock_guard lk(mutex_);
  return endpoint_;
}

AnalysisOutcome BotDetectionEngine::analyze(util::SysTime windowStart, util::SysTime windowEnd) {
  AnalysisOutcome out;
  std::optional<nwdaf::ModelEndpoint> endpoint;
  {
    std::lock_guard lk(mutex_);
    endpoint = endpoint_;
  }
  if (!endpoint) {
    out.status = AnalysisOutcome::Status::NoModel;
    return out;
  }

  std::vector<nwdaf::StoredUsageReport> reports = store_->query(windowStart, windowEnd);
  if (reports.empty()) return out;  // nothing to judge

  CommGraph graph = build_comm_graph(reports);
  std::set<std::string> ues;
  for (const auto& r : reports) ues.insert(r.notification.ueIpv4Addr);

  std::vector<std::string> subjects;
  std::vector<std::array<double, 5>> rows;
  auto features = extract_features(graph);
  for (const std::string& ue : ues) {
    auto it = features.find(ue);
    if (it == features.end()) continue;  // UE with no usable flow data yet
    subjects.push_back(ue);
    rows.push_back(it->second.to_vector());
  }
  if (subjects.empty()) return out;

  auto uri = util::parse_http_uri(endpoint->inferenceUri);
  if (!uri) {
    out.status = AnalysisOutcome::Status::InferenceUnreachable;
    return out;
  }
  json features_json = json::array();
  for (const auto& row : rows) features_json.push_back(row);

  const util::SteadyTime t0 = util::now_steady();
  httplib::Client client(uri->host, uri->port);
  client.set_connection_timeout(0, cfg_.inferenceTimeoutMs * 1000);
  client.set_read_timeout(0, cfg_.inferenceTimeoutMs * 1000);
  auto res = client.Post(uri->path, json{{"features", features_json}}.dump(), "application/json");
  const int64_t inferUs = std::chrono::duration_cast<std::chrono::microseconds>(
                              util::now_steady() - t0)
                              .count();
  {
    std::lock_guard lk(mutex_);
    ++inferenceCalls_;
  }
  if (!res || res->status != 200) {
    util::log_warn("engine", "inference endpoint unreachable: " + endpoint->inferenceUri);
    out.status = AnalysisOutcome::Status::InferenceUnreachable;
    return out;
  }
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("voteShares") ||
      body["voteShares"].size() != subjects.size()) {
    out.status = AnalysisOutcome::Status::InferenceUnreachable;
    return out;
  }
  const int modelVersion =
      body.contains("model") ? body["model"].value("version", endpoint->version) : endpoint->version;

  const util::SysTime now = util::now_sys();
  for (size_t i = 0; i < subjects.size(); ++i) {
    nwdaf::DetectionResult r;
    r.ueIpv4Addr = subjects[i];
    r.confidence = body["voteShares"][i].get<double>();
    r.anomalous = r.confidence >= cfg_.decisionThreshold;
    r.excepId = nwdaf::ExceptionId::SuspicionOfDdosAttack;
    r.windowStart = windowStart;
    r.windowEnd = windowEnd;
    out.results.push_back(r);

    DetectionEvent ev{now, r, modelVersion, inferUs};
    std::function<void(const DetectionEvent&)> observer;
    {
      std::lock_guard lk(mutex_);
      log_.push_back(ev);
      observer = observer_;
    }
    if (observer) observer(ev);
  }
  return out;
}

std::vector<BotDetectionEngine::DetectionEvent> BotDetectionEngine::detection_log() const {
  std::lock_guard lk(mutex_);
  return log_;
}

std::string BotDetectionEngine::detection_log_json() const {
  json out = json::array();
  for (const DetectionEvent& e : detection_log()) {
    out.push_back(json{{"at", util::format_rfc3339(e.at)},
                       {"ueIpv4Addr", e.result.ueIpv4Addr},
                       {"anomalous", e.result.anomalous},
                       {"confidence", e.result.confidence},
                       {"modelVersion", e.modelVersion},
                       {"inferenceMicros", e.inferenceMicros}});
  }
  return out.dump();
}

void BotDetectionEngine::set_detection_observer(
    std::function<void(const DetectionEvent&)> observer) {
  std::lock_guard lk(mutex_);
  observer_ = std::move(observer);
}

size_t BotDetectionEngine::inference_calls() const {
  std::lock_guard lk(mutex_);
  return inferenceCalls_;
}

}  // namespace cloop::engine
