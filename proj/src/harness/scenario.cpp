#include "cloop/harness/scenario.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/engine/engine.hpp"
#include "cloop/harness/proc.hpp"
#include "cloop/mlprov/dataset.hpp"
#include "cloop/mlprov/service.hpp"
#include "cloop/nwdaf/service.hpp"
#include "cloop/smf/smf.hpp"
#include "cloop/upf/service.hpp"
#include "cloop/util/framing.hpp"
#include "cloop/util/log.hpp"
#include "cloop/util/toml.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool wait_for(const std::function<bool()>& cond, double timeoutSeconds) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeoutSeconds);
  while (std::chrono::steady_clock::now() < deadline) {
    if (cond()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  return cond();
}

std::string make_scratch(const std::string& configured) {
  if (!configured.empty()) {
    fs::create_directories(configured);
    return configured;
  }
  std::string tmpl = "/tmp/cloop-XXXXXX";
  char* dir = ::mkdtemp(tmpl.data());
  return dir ? std::string(dir) : std::string("/tmp");
}

json http_get_json(const std::string& baseUri, const std::string& path) {
  auto uri = util::parse_http_uri(baseUri);
  if (!uri) return json();
  httplib::Client client(uri->host, uri->port);
  client.set_connection_timeout(1, 0);
  client.set_read_timeout(1, 0);
  auto res = client.Get(path);
  if (!res || res->status != 200) return json();
  json j = json::parse(res->body, nullptr, false);
  return j.is_discarded() ? json() : j;
}

bool http_post_ok(const std::string& baseUri, const std::string& path, const std::string& body) {
  auto uri = util::parse_http_uri(baseUri);
  if (!uri) return false;
  httplib::Client client(uri->host, uri->port);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  auto res = client.Post(path, body, "application/json");
  return res && res->status < 300;
}

// does this stored report carry any of the bot's scan flows?
bool report_has_scan_flow(const ees::Notification& n, const std::string& botUe,
                          const std::set<std::string>& serverSet) {
  if (n.ueIpv4Addr != botUe) return false;
  for (const ees::UsageMeasurementItem& item : n.userDataUsageMeasurements) {
    if (!item.flowInfo) continue;
    auto flow = ees::parse_pack_filt_id(item.flowInfo->packFiltId);
    if (flow && serverSet.count(flow->dstIp)) return true;
  }
  return false;
}

int pick_free_port() {
  int port = 0;
  const int fd = util::tcp_listen("127.0.0.1", 0, &port);
  if (fd >= 0) ::close(fd);
  return port;
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& tomlPath) {
  util::toml::Document doc = util::toml::parse_file(tomlPath);
  ScenarioConfig cfg;
  cfg.mode = util::toml::get_string(doc.root, "mode", "inproc");
  cfg.collectionPeriodSeconds =
      static_cast<int>(util::toml::get_int(doc.root, "collection_period_s", 1));
  cfg.smfPeriodSeconds = static_cast<int>(util::toml::get_int(doc.root, "smf_period_s", 1));
  cfg.durationSeconds = util::toml::get_double(doc.root, "duration_s", 20.0);
  cfg.runs = static_cast<int>(util::toml::get_int(doc.root, "runs", 1));
  cfg.probeTimeoutSeconds = util::toml::get_double(doc.root, "probe_timeout_s", 0.5);
  cfg.seed = static_cast<uint64_t>(util::toml::get_int(doc.root, "seed", 1));
  cfg.probeTarget = util::toml::get_string(doc.root, "probe_target", cfg.probeTarget);
  cfg.forestTrees = static_cast<int>(util::toml::get_int(doc.root, "forest_trees", 100));
  cfg.forestMaxDepth = static_cast<int>(util::toml::get_int(doc.root, "forest_max_depth", 10));
  cfg.trainSeed = static_cast<uint64_t>(util::toml::get_int(doc.root, "train_seed", 1));
  cfg.workDir = util::toml::get_string(doc.root, "work_dir", "");
  cfg.servers = util::toml::get_string_array(doc.root, "servers");
  const int serverCount = static_cast<int>(util::toml::get_int(doc.root, "server_count", 0));
  for (int i = static_cast<int>(cfg.servers.size()); i < serverCount; ++i) {
    cfg.servers.push_back("10.9.0." + std::to_string(i + 1));
  }
  auto it = doc.arrays.find("ues");
  if (it != doc.arrays.end()) {
    for (const util::toml::Table& t : it->second) {
      UeProfile ue;
      ue.ueIpv4Addr = util::toml::require_string(t, "ue_ipv4_addr");
      ue.pduSessionId = util::toml::require_int(t, "pdu_session_id");
      const std::string behavior = util::toml::get_string(t, "behavior", "BENIGN_IPERF");
      auto b = ue_behavior_from_token(behavior);
      if (!b) throw std::invalid_argument("unknown behavior " + behavior);
      ue.behavior = *b;
      ue.rateMbps = util::toml::get_double(t, "rate_mbps", 10.0);
      ue.gapSeconds = util::toml::get_double(t, "gap_s", 0.05);
      ue.seed = static_cast<uint64_t>(util::toml::get_int(t, "seed", 1));
      cfg.ues.push_back(std::move(ue));
    }
  }
  validate(cfg);
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.ues.empty()) throw std::invalid_argument("scenario needs at least one UE");
  if (cfg.durationSeconds <= cfg.collectionPeriodSeconds) {
    throw std::invalid_argument("duration must exceed the collection period");
  }
  if (cfg.probeTimeoutSeconds <= 0) throw std::invalid_argument("probe timeout must be positive");
  if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
  std::set<std::string> ips;
  std::set<int64_t> sessions;
  for (const UeProfile& ue : cfg.ues) {
    if (!ips.insert(ue.ueIpv4Addr).second) throw std::invalid_argument("duplicate UE address");
    if (!sessions.insert(ue.pduSessionId).second) {
      throw std::invalid_argument("duplicate pduSessionId");
    }
    if (ue.behavior == UeBehavior::BotScan && cfg.servers.size() < 2) {
      throw std::invalid_argument("BOT_SCAN requires at least 2 servers");
    }
    if (ue.behavior == UeBehavior::BenignIperf && ue.rateMbps <= 0) {
      throw std::invalid_argument("rate must be positive");
    }
    if (ue.behavior == UeBehavior::BotScan && ue.gapSeconds <= 0) {
      throw std::invalid_argument("scan gap must be positive");
    }
  }
  if (!cfg.ues.empty() && cfg.servers.empty()) {
    throw std::invalid_argument("scenario needs servers");
  }
}

ScenarioRunner::ScenarioRunner(ScenarioConfig cfg)
    : cfg_(std::move(cfg)), scratch_(make_scratch(cfg_.workDir)) {
  if (cfg_.binDir.empty()) cfg_.binDir = self_exe_dir();
}

const mlprov::ForestModel& ScenarioRunner::model() {
  if (model_) return *model_;
  const std::string csv = scratch_ + "/synth.csv";
  SynthParams sp = cfg_.synth;
  sp.seed = cfg_.trainSeed;
  generate_synthetic_flow_csv(csv, sp);
  auto rows = ingest_flow_csv(csv);
  mlprov::Dataset all = to_dataset(rows);
  mlprov::Dataset train, test;
  mlprov::split_dataset(all, 0.25, cfg_.trainSeed, &train, &test);

  mlprov::ModelDescriptor d;
  d.name = "bot-rf";
  d.eventId = "ABNORMAL_BEHAVIOUR";
  d.featureSchema = mlprov::graph_feature_schema();
  mlprov::ForestModel m = mlprov::train_forest(
      train, mlprov::TrainParams{cfg_.forestTrees, cfg_.forestMaxDepth, cfg_.trainSeed}, d);
  holdoutAccuracy_ = mlprov::evaluate_accuracy(m, test);
  m.descriptor.metrics["holdoutAccuracy"] = holdoutAccuracy_;
  model_ = std::move(m);
  return *model_;
}

double ScenarioRunner::holdout_accuracy() {
  model();
  return holdoutAccuracy_;
}

RunResult ScenarioRunner::run_once(int period, int runIndex, util::EventLog& events) {
  if (cfg_.mode == "multiproc") return run_once_multiproc(period, runIndex, events);
  return run_once_inproc(period, runIndex, events);
}

std::vector<RunResult> ScenarioRunner::run_campaign(const std::vector<int>& intervals,
                                                    util::EventLog& events) {
  std::vector<RunResult> out;
  int runIndex = 0;
  for (int interval : intervals) {
    for (int r = 0; r < cfg_.runs; ++r) {
      out.push_back(run_once(interval, runIndex++, events));
    }
  }
  return out;
}

RunResult ScenarioRunner::run_once_inproc(int period, int runIndex, util::EventLog& events) {
  RunResult rr;
  rr.run = runIndex;
  rr.collectionPeriodSeconds = period;
  const std::string runDir = scratch_ + "/run-" + std::to_string(runIndex);
  fs::create_directories(runDir);

  const UeProfile* bot = nullptr;
  for (const UeProfile& ue : cfg_.ues) {
    if (ue.behavior == UeBehavior::BotScan) {
      bot = &ue;
      break;
    }
  }
  const std::string botUe = bot ? bot->ueIpv4Addr : "";
  const std::set<std::string> serverSet(cfg_.servers.begin(), cfg_.servers.end());

  const json runTag{{"run", runIndex}, {"interval", period}};
  events.append("harness", "run_start", runTag.dump());

  // --- services ---
  mlprov::MlServiceConfig mcfg;
  mcfg.registryDir = runDir + "/registry";
  mlprov::MlProvisionService mlp(mcfg);
  if (!mlp.start()) throw std::runtime_error("ServiceStartupFailure: ml-provision");
  mlp.register_model(model());

  upf::UpfServiceConfig ucfg;
  ucfg.ingestPort = -1;  // in-process ingestion
  upf::UpfService upfsvc(ucfg);
  if (!upfsvc.start()) throw std::runtime_error("ServiceStartupFailure: upf");
  for (const UeProfile& ue : cfg_.ues) {
    if (!http_post_ok(upfsvc.base_uri(), "/n4/v1/sessions",
                      json{{"pduSessionId", ue.pduSessionId},
                           {"ueIpv4Addr", ue.ueIpv4Addr},
                           {"snssai", {{"sst", 1}, {"sd", "000001"}}}}
                          .dump())) {
      throw std::runtime_error("ServiceStartupFailure: session provisioning");
    }
  }

  nwdaf::NwdafConfig ncfg;
  ncfg.upfUri = upfsvc.base_uri();
  ncfg.collectionPeriodS = period;
  ncfg.storePath = runDir + "/reports.jsonl";
  ncfg.mlProvisionUri = mlp.base_uri();
  nwdaf::NwdafService nwdafsvc(ncfg);
  engine::BotDetectionEngine eng(&nwdafsvc.store());
  nwdafsvc.set_engine(nwdaf::AnalyticsEventId::AbnormalBehaviour, &eng);
  nwdafsvc.set_model_update_handler(
      [&eng](const nwdaf::ModelEndpoint& ep) { eng.set_model_endpoint(ep); });
  nwdafsvc.set_detection_log_provider([&eng] { return eng.detection_log_json(); });

  std::atomic<int64_t> t1Ms{-1}, t2Ms{-1}, releaseMs{-1};
  std::mutex fpMutex;
  std::set<std::string> falsePositives;

  nwdafsvc.set_report_observer([&](const nwdaf::StoredUsageReport& r) {
    if (botUe.empty() || t1Ms.load() >= 0) return;
    if (report_has_scan_flow(r.notification, botUe, serverSet)) {
      int64_t expected = -1;
      if (t1Ms.compare_exchange_strong(expected, util::to_unix_ms(r.receivedAt))) {
        events.append("nwdaf", "first_malicious_report",
                      json{{"run", runIndex},
                           {"interval", period},
                           {"receivedAt", util::format_rfc3339(r.receivedAt)}}
                          .dump());
      }
    }
  });
  eng.set_detection_observer([&](const engine::BotDetectionEngine::DetectionEvent& ev) {
    if (!ev.result.anomalous) return;
    if (ev.result.ueIpv4Addr == botUe) {
      int64_t expected = -1;
      if (t2Ms.compare_exchange_strong(expected, util::to_unix_ms(ev.at))) {
        events.append("engine", "detection",
                      json{{"run", runIndex},
                           {"interval", period},
                           {"ueIpv4Addr", ev.result.ueIpv4Addr},
                           {"confidence", ev.result.confidence},
                           {"modelVersion", ev.modelVersion},
                           {"inferenceMicros", ev.inferenceMicros}}
                          .dump());
      }
    } else {
      std::lock_guard lk(fpMutex);
      falsePositives.insert(ev.result.ueIpv4Addr);
    }
  });

  // ml subscription fires during start(), so all hooks are wired before this
  if (!nwdafsvc.start()) throw std::runtime_error("ServiceStartupFailure: nwdaf");

  smf::SmfConfig scfg;
  scfg.nwdafUri = nwdafsvc.base_uri();
  scfg.upfUri = upfsvc.base_uri();
  scfg.reportPeriodS = cfg_.smfPeriodSeconds;
  for (const UeProfile& ue : cfg_.ues) {
    scfg.sessions.push_back(smf::UeSessionBinding{ue.ueIpv4Addr, ue.pduSessionId, false, {}});
  }
  smf::SmfService smfsvc(scfg);
  smfsvc.core().set_release_observer([&](const smf::UeSessionBinding& b) {
    int64_t expected = -1;
    if (b.ueIpv4Addr == botUe &&
        releaseMs.compare_exchange_strong(expected,
                                          util::to_unix_ms(b.releasedAt.value_or(util::now_sys())))) {
      events.append("smf", "session_release",
                    json{{"run", runIndex},
                         {"interval", period},
                         {"ueIpv4Addr", b.ueIpv4Addr},
                         {"pduSessionId", b.pduSessionId}}
                        .dump());
    }
  });
  if (!smfsvc.start()) throw std::runtime_error("ServiceStartupFailure: smf");

  if (!wait_for([&] { return nwdafsvc.sbi_subscribed() && smfsvc.subscribed() && eng.has_model(); },
                15.0)) {
    throw std::runtime_error("ServiceStartupFailure: subscriptions not established");
  }

  // --- traffic ---
  std::atomic<bool> stopBenign{false}, stopBot{false}, stopProbes{false};
  std::vector<std::thread> threads;
  std::vector<TrafficStats> benignStats(cfg_.ues.size());
  std::vector<ProbeSeries> probeSeries(cfg_.ues.size());
  ProbeMonitor botMonitor;

  size_t botIdx = cfg_.ues.size();
  for (size_t i = 0; i < cfg_.ues.size(); ++i) {
    const UeProfile& ue = cfg_.ues[i];
    if (ue.behavior == UeBehavior::BotScan && bot == &cfg_.ues[i]) {
      botIdx = i;
      continue;  // bot traffic starts at attackStart
    }
    threads.emplace_back([&, i] {
      TrafficStream stream(cfg_.ues[i], cfg_.servers);
      InprocSink sink(&upfsvc.core());
      benignStats[i] = drive_traffic(stream, sink, 1e9, stopBenign);
    });
  }
  for (size_t i = 0; i < cfg_.ues.size(); ++i) {
    threads.emplace_back([&, i] {
      InprocSink sink(&upfsvc.core());
      probeSeries[i] =
          run_probe_loop(cfg_.ues[i], cfg_.probeTarget, sink, cfg_.probeTimeoutSeconds, stopProbes,
                         1.0, i == botIdx ? &botMonitor : nullptr);
    });
  }

  // benign warmup with a seeded phase offset inside the collection window
  const double phase =
      static_cast<double>(mix(cfg_.seed ^ mix(static_cast<uint64_t>(runIndex) + 77) ^
                              static_cast<uint64_t>(period)) %
                          1000) /
      1000.0 * period;
  std::this_thread::sleep_for(std::chrono::duration<double>(1.5 + phase));

  const util::SysTime attackStart = util::now_sys();
  const int64_t attackMs = util::to_unix_ms(attackStart);
  TrafficStats botStats;
  if (bot) {
    events.append("harness", "attack_start", runTag.dump());
    threads.emplace_back([&] {
      TrafficStream stream(*bot, cfg_.servers);
      InprocSink sink(&upfsvc.core());
      botStats = drive_traffic(stream, sink, 1e9, stopBot);
    });

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(cfg_.durationSeconds);
    while (std::chrono::steady_clock::now() < deadline && botMonitor.firstFailureMs.load() < 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    if (botMonitor.firstFailureMs.load() >= 0) {
      events.append("harness", "first_probe_failure",
                    json{{"run", runIndex},
                         {"interval", period},
                         {"t3s", (botMonitor.firstFailureMs.load() - attackMs) / 1000.0}}
                        .dump());
      // post-release observation window
      std::this_thread::sleep_for(std::chrono::duration<double>(3.0));
    } else {
      rr.timedOut = true;
      events.append("harness", "scenario_timeout", runTag.dump());
    }
  } else {
    // negative control: benign-only scenario
    std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.durationSeconds));
  }

  stopBot.store(true);
  stopBenign.store(true);
  stopProbes.store(true);
  for (std::thread& t : threads) t.join();

  // --- harvest ---
  if (t1Ms.load() >= 0) rr.breakdown.t1 = (t1Ms.load() - attackMs) / 1000.0;
  if (t2Ms.load() >= 0) rr.breakdown.t2 = (t2Ms.load() - attackMs) / 1000.0;
  if (botMonitor.firstFailureMs.load() >= 0) {
    rr.breakdown.t3 = (botMonitor.firstFailureMs.load() - attackMs) / 1000.0;
  }
  rr.released = releaseMs.load() >= 0;
  if (bot && rr.released) {
    const util::SysTime releasedAt = util::from_unix_ms(releaseMs.load());
    for (const ProbeSample& s : probeSeries[botIdx].samples) {
      if (s.sentAt > releasedAt) {
        ++rr.postReleaseProbes;
        if (s.success) ++rr.postReleaseProbeSuccesses;
      }
    }
    rr.botUlBytes = botStats.ulBytes;
  }
  for (size_t i = 0; i < cfg_.ues.size(); ++i) {
    if (i != botIdx) rr.benignUlBytes += benignStats[i].ulBytes;
  }
  {
    std::lock_guard lk(fpMutex);
    rr.falsePositiveUes.assign(falsePositives.begin(), falsePositives.end());
  }

  events.append("harness", "run_end",
                json{{"run", runIndex},
                     {"interval", period},
                     {"t1s", rr.breakdown.t1},
                     {"t2s", rr.breakdown.t2},
                     {"t3s", rr.breakdown.t3},
                     {"released", rr.released},
                     {"timedOut", rr.timedOut},
                     {"falsePositives", rr.falsePositiveUes},
                     {"postReleaseProbes", rr.postReleaseProbes},
                     {"postReleaseProbeSuccesses", rr.postReleaseProbeSuccesses}}
                    .dump());

  smfsvc.stop();
  nwdafsvc.stop();
  upfsvc.stop();
  mlp.stop();
  return rr;
}

RunResult ScenarioRunner::run_once_multiproc(int period, int runIndex, util::EventLog& events) {
  RunResult rr;
  rr.run = runIndex;
  rr.collectionPeriodSeconds = period;
  const std::string runDir = scratch_ + "/mprun-" + std::to_string(runIndex);
  fs::create_directories(runDir);

  const UeProfile* bot = nullptr;
  for (const UeProfile& ue : cfg_.ues) {
    if (ue.behavior == UeBehavior::BotScan) {
      bot = &ue;
      break;
    }
  }
  const std::string botUe = bot ? bot->ueIpv4Addr : "";
  const std::set<std::string> serverSet(cfg_.servers.begin(), cfg_.servers.end());

  const int mlPort = pick_free_port();
  const int upfPort = pick_free_port();
  const int ingestPort = pick_free_port();
  const int nwdafPort = pick_free_port();
  const int smfPort = pick_free_port();
  const std::string mlUri = "http://127.0.0.1:" + std::to_string(mlPort);
  const std::string upfUri = "http://127.0.0.1:" + std::to_string(upfPort);
  const std::string nwdafUri = "http://127.0.0.1:" + std::to_string(nwdafPort);
  const std::string smfUri = "http://127.0.0.1:" + std::to_string(smfPort);

  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(runDir + "/" + name, std::ios::trunc);
    out << text;
  };
  write("mlprov.toml", "registry_dir = \"" + runDir + "/registry\"\nlisten_addr = \"127.0.0.1:" +
                           std::to_string(mlPort) + "\"\n");
  write("upf.toml", "listen_addr = \"127.0.0.1\"\nee_port = " + std::to_string(upfPort) +
                        "\ningest_port = " + std::to_string(ingestPort) + "\n");
  write("nwdaf.toml", "listen_addr = \"127.0.0.1:" + std::to_string(nwdafPort) +
                          "\"\nupf_uri = \"" + upfUri + "\"\ncollection_period_s = " +
                          std::to_string(period) + "\nstore_path = \"" + runDir +
                          "/reports.jsonl\"\nml_provision_uri = \"" + mlUri + "\"\n");
  std::string smfToml = "listen_addr = \"127.0.0.1:" + std::to_string(smfPort) +
                        "\"\nnwdaf_uri = \"" + nwdafUri + "\"\nupf_uri = \"" + upfUri +
                        "\"\nreport_period_s = " + std::to_string(cfg_.smfPeriodSeconds) + "\n";
  for (const UeProfile& ue : cfg_.ues) {
    smfToml += "\n[[sessions]]\nue_ipv4_addr = \"" + ue.ueIpv4Addr + "\"\npdu_session_id = " +
               std::to_string(ue.pduSessionId) + "\n";
  }
  write("smf.toml", smfToml);

  std::vector<pid_t> pids;
  auto teardown = [&pids] {
    for (auto it = pids.rbegin(); it != pids.rend(); ++it) terminate_process(*it);
    pids.clear();
  };
  auto spawn_or_die = [&](const std::vector<std::string>& argv, const std::string& health) {
    const pid_t pid = spawn_process(argv);
    if (pid < 0 || !wait_http_ready(health, 10.0)) {
      teardown();
      throw std::runtime_error("ServiceStartupFailure: " + argv[0]);
    }
    pids.push_back(pid);
  };

  const std::string bin = cfg_.binDir;
  const json runTag{{"run", runIndex}, {"interval", period}};
  events.append("harness", "run_start", runTag.dump());

  spawn_or_die({bin + "/mlprov", "serve", "--config", runDir + "/mlprov.toml"}, mlUri);
  if (!http_post_ok(mlUri, "/admin/models", mlprov::forest_to_json(model()))) {
    teardown();
    throw std::runtime_error("ServiceStartupFailure: model registration");
  }
  spawn_or_die({bin + "/upfd", "--config", runDir + "/upf.toml"}, upfUri);
  for (const UeProfile& ue : cfg_.ues) {
    if (!http_post_ok(upfUri, "/n4/v1/sessions",
                      json{{"pduSessionId", ue.pduSessionId}, {"ueIpv4Addr", ue.ueIpv4Addr}}
                          .dump())) {
      teardown();
      throw std::runtime_error("ServiceStartupFailure: session provisioning");
    }
  }
  spawn_or_die({bin + "/nwdafd", "--config", runDir + "/nwdaf.toml"}, nwdafUri);
  spawn_or_die({bin + "/smfd", "--config", runDir + "/smf.toml"}, smfUri);

  if (!wait_for(
          [&] {
            json sbi = http_get_json(nwdafUri, "/sbi/status");
            json smf = http_get_json(smfUri, "/smf/status");
            return sbi.value("subscribed", false) && smf.value("subscribed", false);
          },
          15.0)) {
    teardown();
    throw std::runtime_error("ServiceStartupFailure: subscriptions not established");
  }

  std::atomic<bool> stopBenign{false}, stopBot{false}, stopProbes{false};
  std::vector<std::thread> threads;
  std::vector<ProbeSeries> probeSeries(cfg_.ues.size());
  ProbeMonitor botMonitor;
  size_t botIdx = cfg_.ues.size();

  for (size_t i = 0; i < cfg_.ues.size(); ++i) {
    if (bot == &cfg_.ues[i]) {
      botIdx = i;
      continue;
    }
    threads.emplace_back([&, i] {
      TrafficStream stream(cfg_.ues[i], cfg_.servers);
      TcpSink sink("127.0.0.1", ingestPort);
      drive_traffic(stream, sink, 1e9, stopBenign);
    });
  }
  for (size_t i = 0; i < cfg_.ues.size(); ++i) {
    threads.emplace_back([&, i] {
      TcpSink sink("127.0.0.1", ingestPort);
      probeSeries[i] =
          run_probe_loop(cfg_.ues[i], cfg_.probeTarget, sink, cfg_.probeTimeoutSeconds, stopProbes,
                         1.0, i == botIdx ? &botMonitor : nullptr);
    });
  }

  const double phase =
      static_cast<double>(mix(cfg_.seed ^ mix(static_cast<uint64_t>(runIndex) + 77) ^
                              static_cast<uint64_t>(period)) %
                          1000) /
      1000.0 * period;
  std::this_thread::sleep_for(std::chrono::duration<double>(1.5 + phase));

  const util::SysTime attackStart = util::now_sys();
  const int64_t attackMs = util::to_unix_ms(attackStart);
  if (bot) {
    events.append("harness", "attack_start", runTag.dump());
    threads.emplace_back([&] {
      TrafficStream stream(*bot, cfg_.servers);
      TcpSink sink("127.0.0.1", ingestPort);
      drive_traffic(stream, sink, 1e9, stopBot);
    });
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(cfg_.durationSeconds);
    while (std::chrono::steady_clock::now() < deadline && botMonitor.firstFailureMs.load() < 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    if (botMonitor.firstFailureMs.load() >= 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(3.0));
    } else {
      rr.timedOut = true;
      events.append("harness", "scenario_timeout", runTag.dump());
    }
  } else {
    std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.durationSeconds));
  }

  stopBot.store(true);
  stopBenign.store(true);
  stopProbes.store(true);
  for (std::thread& t : threads) t.join();

  // harvest measurements from the service-side records
  if (bot) {
    json reports = http_get_json(nwdafUri, "/store/reports?ue=" + botUe);
    if (reports.is_array()) {
      for (const json& r : reports) {
        try {
          ees::Notification n = ees::decode_notification(r.at("notification").dump());
          if (report_has_scan_flow(n, botUe, serverSet)) {
            const int64_t ms =
                util::to_unix_ms(util::parse_rfc3339(r.at("receivedAt").get<std::string>()));
            if (ms >= attackMs) {
              rr.breakdown.t1 = (ms - attackMs) / 1000.0;
              break;
            }
          }
        } catch (const std::exception&) {
        }
      }
    }
    json detections = http_get_json(nwdafUri, "/engine/detections");
    std::set<std::string> fps;
    if (detections.is_array()) {
      for (const json& d : detections) {
        if (!d.value("anomalous", false)) continue;
        const std::string ue = d.value("ueIpv4Addr", "");
        if (ue == botUe) {
          if (rr.breakdown.t2 < 0) {
            const int64_t ms = util::to_unix_ms(util::parse_rfc3339(d.at("at").get<std::string>()));
            rr.breakdown.t2 = (ms - attackMs) / 1000.0;
          }
        } else {
          fps.insert(ue);
        }
      }
    }
    rr.falsePositiveUes.assign(fps.begin(), fps.end());
    if (botMonitor.firstFailureMs.load() >= 0) {
      rr.breakdown.t3 = (botMonitor.firstFailureMs.load() - attackMs) / 1000.0;
    }
    json bindings = http_get_json(smfUri, "/smf/bindings");
    std::optional<util::SysTime> releasedAt;
    if (bindings.is_array()) {
      for (const json& b : bindings) {
        if (b.value("ueIpv4Addr", "") == botUe && b.value("state", "") == "RELEASED") {
          rr.released = true;
          if (b.contains("releasedAt")) {
            releasedAt = util::parse_rfc3339(b["releasedAt"].get<std::string>());
          }
        }
      }
    }
    if (releasedAt && botIdx < probeSeries.size()) {
      for (const ProbeSample& s : probeSeries[botIdx].samples) {
        if (s.sentAt > *releasedAt) {
          ++rr.postReleaseProbes;
          if (s.success) ++rr.postReleaseProbeSuccesses;
        }
      }
    }
  }

  events.append("harness", "run_end",
                json{{"run", runIndex},
                     {"interval", period},
                     {"t1s", rr.breakdown.t1},
                     {"t2s", rr.breakdown.t2},
                     {"t3s", rr.breakdown.t3},
                     {"released", rr.released},
                     {"timedOut", rr.timedOut},
                     {"falsePositives", rr.falsePositiveUes},
                     {"postReleaseProbes", rr.postReleaseProbes},
                     {"postReleaseProbeSuccesses", rr.postReleaseProbeSuccesses}}
                    .dump());

  teardown();
  return rr;
}

}  // namespace cloop::harness
