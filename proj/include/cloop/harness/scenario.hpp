#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cloop/harness/flowdata.hpp"
#include "cloop/harness/traffic.hpp"
#include "cloop/mlprov/forest.hpp"
#include "cloop/util/eventlog.hpp"

namespace cloop::harness {

struct ScenarioConfig {
  std::vector<UeProfile> ues;
  std::vector<std::string> servers;
  std::string probeTarget = "10.9.255.1";
  int collectionPeriodSeconds = 1;
  int smfPeriodSeconds = 1;
  double durationSeconds = 20;  // cap from attack start until giving up on a run
  int runs = 1;
  double probeTimeoutSeconds = 0.5;
  uint64_t seed = 1;
  std::string mode = "inproc";  // or "multiproc"
  int forestTrees = 100;
  int forestMaxDepth = 10;
  uint64_t trainSeed = 1;
  SynthParams synth;
  std::string workDir;  // scratch; empty picks a fresh /tmp directory
  std::string binDir;   // service executables for multiproc mode
};

ScenarioConfig load_scenario_config(const std::string& tomlPath);
void validate(const ScenarioConfig& cfg);  // throws std::invalid_argument

/// Attack-to-mitigation latencies of one run, seconds from attack start;
/// negative = never observed.
struct LatencyBreakdown {
  double t1 = -1;  // first stored report carrying the bot's scan flows
  double t2 = -1;  // first anomalous detection of the bot UE
  double t3 = -1;  // first bot probe failure after >= 1 success

  bool complete() const { return t1 >= 0 && t2 >= 0 && t3 >= 0; }
  bool ordered() const { return complete() && t1 > 0 && t1 <= t2 && t2 <= t3; }
};

struct RunResult {
  int run = 0;
  int collectionPeriodSeconds = 0;
  LatencyBreakdown breakdown;
  bool timedOut = false;  // mitigation not observed within durationSeconds
  bool released = false;
  size_t postReleaseProbes = 0;
  size_t postReleaseProbeSuccesses = 0;
  std::vector<std::string> falsePositiveUes;
  uint64_t botUlBytes = 0;
  uint64_t benignUlBytes = 0;
};

/// Executes Subscription -> Data Collection -> Analysis -> Mitigation runs
/// and measures the latency breakdown. One ScenarioRunner trains the
/// detector once and reuses it across runs; every run gets fresh services.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioConfig cfg);

  /// Synthetic corpus -> holdout split -> forest. Cached after first call.
  const mlprov::ForestModel& model();
  double holdout_accuracy();

  RunResult run_once(int collectionPeriodSeconds, int runIndex, util::EventLog& events);

  /// cfg.runs repetitions per interval, breakdowns in run order.
  std::vector<RunResult> run_campaign(const std::vector<int>& intervals, util::EventLog& events);

  const ScenarioConfig& config() const { return cfg_; }
  const std::string& scratch_dir() const { return scratch_; }

 private:
  RunResult run_once_inproc(int period, int runIndex, util::EventLog& events);
  RunResult run_once_multiproc(int period, int runIndex, util::EventLog& events);

  ScenarioConfig cfg_;
  std::string scratch_;
  std::optional<mlprov::ForestModel> model_;
  double holdoutAccuracy_ = 0.0;
};

}  // namespace cloop::harness
