#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cloop/engine/graph.hpp"
#include "cloop/nwdaf/service.hpp"
#include "cloop/nwdaf/store.hpp"

namespace cloop::engine {

struct BotEngineConfig {
  double decisionThreshold = 0.5;  // forest vote share marking a UE anomalous
  int inferenceTimeoutMs = 2000;
};

/// Abnormal-behaviour analytics engine: builds the communication graph from
/// stored usage reports, extracts per-node features for UE nodes and
/// classifies them through the provisioned inference endpoint.
class BotDetectionEngine : public nwdaf::AnalyticsEngine {
 public:
  explicit BotDetectionEngine(const nwdaf::ReportStore* store, BotEngineConfig cfg = {});

  void set_model_endpoint(const nwdaf::ModelEndpoint& endpoint);
  bool has_model() const;
  std::optional<nwdaf::ModelEndpoint> model_endpoint() const;

  nwdaf::AnalysisOutcome analyze(util::SysTime windowStart, util::SysTime windowEnd) override;

  struct DetectionEvent {
    util::SysTime at{};
    nwdaf::DetectionResult result;
    int modelVersion = 0;
    int64_t inferenceMicros = 0;  // model latency, logged separately from data latency
  };

  std::vector<DetectionEvent> detection_log() const;
  std::string detection_log_json() const;
  void set_detection_observer(std::function<void(const DetectionEvent&)> observer);

  size_t inference_calls() const;

 private:
  const nwdaf::ReportStore* store_;
  BotEngineConfig cfg_;

  mutable std::mutex mutex_;
  std::optional<nwdaf::ModelEndpoint> endpoint_;
  std::vector<DetectionEvent> log_;
  std::function<void(const DetectionEvent&)> observer_;
  size_t inferenceCalls_ = 0;
};

}  // namespace cloop::engine
