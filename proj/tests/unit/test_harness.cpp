#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "cloop/harness/bench.hpp"
#include "cloop/harness/flowdata.hpp"
#include "cloop/harness/proc.hpp"
#include "cloop/harness/report.hpp"
#include "cloop/harness/scenario.hpp"
#include "cloop/mlprov/dataset.hpp"
#include "cloop/upf/upf.hpp"

#include <unistd.h>

using namespace cloop;
namespace fs = std::filesystem;

#ifndef CLOOP_TOOLS_DIR
#define CLOOP_TOOLS_DIR ""
#endif

namespace {

harness::UeProfile bot_profile() {
  harness::UeProfile ue;
  ue.ueIpv4Addr = "10.45.0.2";
  ue.pduSessionId = 1;
  ue.behavior = harness::UeBehavior::BotScan;
  ue.gapSeconds = 0.05;
  ue.seed = 7;
  return ue;
}

std::vector<std::string> servers(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("10.9.0." + std::to_string(i + 1));
  return out;
}

}  // namespace

TEST_CASE("traffic streams are deterministic under a fixed seed") {
  harness::UeProfile ue = bot_profile();
  harness::TrafficStream a(ue, servers(20));
  harness::TrafficStream b(ue, servers(20));
  for (int i = 0; i < 500; ++i) {
    harness::TimedPacket pa = a.next();
    harness::TimedPacket pb = b.next();
    CHECK(pa.at == pb.at);
    CHECK(pa.pkt == pb.pkt);
  }
}

TEST_CASE("iperf stream hits the configured uplink rate") {
  harness::UeProfile ue;
  ue.ueIpv4Addr = "10.45.0.3";
  ue.pduSessionId = 2;
  ue.behavior = harness::UeBehavior::BenignIperf;
  ue.rateMbps = 10.0;
  harness::TrafficStream s(ue, servers(3));
  uint64_t ulBytes = 0;
  while (true) {
    harness::TimedPacket tp = s.next();
    if (tp.at > 10.0) break;
    if (tp.pkt.direction == upf::PacketDirection::Uplink) ulBytes += tp.pkt.sizeBytes;
  }
  // 10 Mbit/s for 10 s = 12.5 MB, within one packet
  CHECK(std::llabs(static_cast<long long>(ulBytes) - 12500000LL) <= 1250);
}

TEST_CASE("bot scan cycles through every distinct server") {
  harness::TrafficStream s(bot_profile(), servers(20));
  std::set<std::string> dsts;
  for (int i = 0; i < 200; ++i) {
    harness::TimedPacket tp = s.next();
    if (tp.pkt.direction == upf::PacketDirection::Uplink) dsts.insert(tp.pkt.flow.dstIp);
  }
  CHECK(dsts.size() == 20);
}

TEST_CASE("web stream stays within three servers") {
  harness::UeProfile ue;
  ue.ueIpv4Addr = "10.45.0.4";
  ue.pduSessionId = 3;
  ue.behavior = harness::UeBehavior::BenignWeb;
  ue.seed = 11;
  harness::TrafficStream s(ue, servers(20));
  std::set<std::string> dsts;
  for (int i = 0; i < 2000; ++i) {
    harness::TimedPacket tp = s.next();
    if (tp.pkt.direction == upf::PacketDirection::Uplink) dsts.insert(tp.pkt.flow.dstIp);
  }
  CHECK(dsts.size() <= 3);
}

TEST_CASE("probe loop: successes while active, stamped failure after release") {
  upf::Upf u;
  u.add_session(1, "10.45.0.2", {1, "000001"});
  harness::UeProfile ue = bot_profile();
  harness::InprocSink sink(&u);
  std::atomic<bool> stop{false};
  harness::ProbeMonitor monitor;
  std::thread releaser([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(450));
    u.release_session(1);
  });
  harness::ProbeSeries series;
  std::thread loop([&] {
    series = harness::run_probe_loop(ue, "10.9.255.1", sink, 0.5, stop, 0.1, &monitor);
  });
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (monitor.firstFailureMs.load() < 0 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  stop.store(true);
  loop.join();
  releaser.join();

  REQUIRE(series.firstFailure.has_value());
  CHECK(series.successes >= 1);
  bool failed = false;
  for (const auto& s : series.samples) {
    if (!s.success) failed = true;
    if (failed) CHECK_FALSE(s.success);  // release is permanent
  }
}

TEST_CASE("flow csv ingestion") {
  const std::string path = "/tmp/cloop-flows-" + std::to_string(::getpid()) + ".csv";

  SUBCASE("toy file: one feature row per distinct source") {
    std::ofstream out(path);
    out << "srcIp,dstIp,srcPort,dstPort,packets,bytes,label\n";
    out << "10.0.0.1,10.0.0.2,1000,80,5,500,0\n";
    out << "10.0.0.1,10.0.0.3,1000,80,3,300,0\n";
    out << "10.0.0.2,10.0.0.1,80,1000,2,200,1\n";
    out.close();
    harness::FlowCsvStats stats;
    auto rows = harness::ingest_flow_csv(path, &stats);
    CHECK(stats.rows == 3);
    CHECK(stats.malformedRows == 0);
    REQUIRE(rows.size() == 2);  // two distinct sources
    for (const auto& r : rows) {
      if (r.node == "10.0.0.1") {
        CHECK(r.label == 0);
        CHECK(r.features[1] == 2);  // outDegree
        CHECK(r.features[3] == 8);  // weighted outDegree
      } else {
        CHECK(r.node == "10.0.0.2");
        CHECK(r.label == 1);
      }
    }
  }

  SUBCASE("empty file gives empty output") {
    std::ofstream out(path);
    out << "srcIp,dstIp,srcPort,dstPort,packets,bytes,label\n";
    out.close();
    CHECK(harness::ingest_flow_csv(path).empty());
  }

  SUBCASE("malformed rows are skipped and counted") {
    std::ofstream out(path);
    out << "srcIp,dstIp,srcPort,dstPort,packets,bytes,label\n";
    out << "10.0.0.1,10.0.0.2,1000,80,5,500,0\n";
    out << "not-an-ip,10.0.0.3,1000,80,3,300,0\n";
    out << "10.0.0.1,10.0.0.3,1000,80,x,300,0\n";
    out << "10.0.0.1,10.0.0.3\n";
    out.close();
    harness::FlowCsvStats stats;
    auto rows = harness::ingest_flow_csv(path, &stats);
    CHECK(stats.rows == 1);
    CHECK(stats.malformedRows == 3);
    CHECK(rows.size() == 1);
  }

  fs::remove(path);
}

TEST_CASE("synthetic corpus trains an accurate detector") {
  const std::string path = "/tmp/cloop-synth-" + std::to_string(::getpid()) + ".csv";
  harness::SynthParams params;
  params.seed = 1;
  harness::generate_synthetic_flow_csv(path, params);
  auto rows = harness::ingest_flow_csv(path);
  // 200 benign + 50 bots + the server pool as sources
  size_t bots = 0;
  for (const auto& r : rows) bots += static_cast<size_t>(r.label);
  CHECK(bots == 50);
  CHECK(rows.size() >= 250);

  auto all = harness::to_dataset(rows);
  mlprov::Dataset train, test;
  mlprov::split_dataset(all, 0.25, 1, &train, &test);
  auto model = mlprov::train_forest(train, mlprov::TrainParams{100, 10, 1},
                                    [] {
                                      mlprov::ModelDescriptor d;
                                      d.name = "bot-rf";
                                      d.eventId = "ABNORMAL_BEHAVIOUR";
                                      d.featureSchema = mlprov::graph_feature_schema();
                                      return d;
                                    }());
  CHECK(mlprov::evaluate_accuracy(model, test) >= 0.95);
  fs::remove(path);
}

TEST_CASE("bench rows and csv output") {
  harness::BenchOptions opts;
  opts.secondsPerTrial = 0.05;
  opts.trials = 2;
  auto rows = harness::overhead_bench({10.0}, {harness::BenchVariant::BaselineNoEes,
                                               harness::BenchVariant::Ees1Sub},
                                      opts);
  REQUIRE(rows.size() == 4);  // saturating + paced for each variant
  for (const auto& r : rows) CHECK(r.achievedDescPerSec > 0);
  const std::string path = "/tmp/cloop-bench-" + std::to_string(::getpid()) + ".csv";
  harness::write_bench_csv(path, rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("achievedDescPerSec") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("scenario config loading and validation") {
  const std::string path = "/tmp/cloop-scn-" + std::to_string(::getpid()) + ".toml";
  std::ofstream out(path);
  out << R"(
mode = "inproc"
collection_period_s = 3
duration_s = 20.0
runs = 2
server_count = 20

[[ues]]
ue_ipv4_addr = "10.45.0.2"
pdu_session_id = 1
behavior = "BOT_SCAN"
gap_s = 0.05

[[ues]]
ue_ipv4_addr = "10.45.0.3"
pdu_session_id = 2
behavior = "BENIGN_IPERF"
rate_mbps = 5.0
)";
  out.close();
  auto cfg = harness::load_scenario_config(path);
  CHECK(cfg.collectionPeriodSeconds == 3);
  CHECK(cfg.servers.size() == 20);
  CHECK(cfg.ues.size() == 2);
  CHECK(cfg.ues[0].behavior == harness::UeBehavior::BotScan);
  CHECK(cfg.probeTimeoutSeconds == doctest::Approx(0.5));  // default

  SUBCASE("validation failures") {
    harness::ScenarioConfig bad = cfg;
    bad.durationSeconds = 1.0;
    CHECK_THROWS_AS(harness::validate(bad), std::invalid_argument);
    bad = cfg;
    bad.ues[1].ueIpv4Addr = bad.ues[0].ueIpv4Addr;
    CHECK_THROWS_AS(harness::validate(bad), std::invalid_argument);
    bad = cfg;
    bad.servers.clear();
    CHECK_THROWS_AS(harness::validate(bad), std::invalid_argument);
    bad = cfg;
    bad.ues[0].gapSeconds = 0;
    CHECK_THROWS_AS(harness::validate(bad), std::invalid_argument);
  }
  fs::remove(path);
}

TEST_CASE("report plumbing: rows, summaries and event-log reconstruction") {
  std::vector<harness::RunResult> results(3);
  for (int i = 0; i < 3; ++i) {
    results[i].run = i;
    results[i].collectionPeriodSeconds = i < 2 ? 1 : 3;
    results[i].breakdown.t1 = 0.5 + i * 0.1;
    results[i].breakdown.t2 = 1.0 + i * 0.1;
    results[i].breakdown.t3 = 2.0 + i * 0.1;
    results[i].released = true;
  }
  auto rows = harness::to_breakdown_rows(results);
  auto summaries = harness::summarize(rows);
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].interval == 1);
  CHECK(summaries[0].completed == 2);
  CHECK(summaries[0].meanT1 == doctest::Approx(0.55));
  CHECK(summaries[1].meanT3 == doctest::Approx(2.2));

  // event log round trip through run_end records
  util::EventLog log;
  for (const auto& r : rows) {
    log.append("harness", "run_end",
               std::string("{\"run\":") + std::to_string(r.run) +
                   ",\"interval\":" + std::to_string(r.interval) + ",\"t1s\":" +
                   std::to_string(r.t1) + ",\"t2s\":" + std::to_string(r.t2) + ",\"t3s\":" +
                   std::to_string(r.t3) + ",\"released\":true,\"timedOut\":false}");
  }
  const std::string path = "/tmp/cloop-ev-" + std::to_string(::getpid()) + ".jsonl";
  log.write_jsonl(path);
  auto rebuilt = harness::breakdown_from_events(util::EventLog::read_jsonl(path));
  REQUIRE(rebuilt.size() == rows.size());
  CHECK(rebuilt[2].t3 == doctest::Approx(rows[2].t3));
  fs::remove(path);

  const std::string csv = "/tmp/cloop-bd-" + std::to_string(::getpid()) + ".csv";
  harness::write_breakdown_csv(csv, rows);
  std::ifstream in(csv);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);  // header + 3 rows
  fs::remove(csv);
}

TEST_CASE("negative control: benign-only scenario causes no mitigation") {
  harness::ScenarioConfig cfg;
  cfg.servers = servers(10);
  cfg.durationSeconds = 4.0;
  cfg.collectionPeriodSeconds = 1;
  harness::UeProfile ue;
  ue.ueIpv4Addr = "10.45.0.3";
  ue.pduSessionId = 2;
  ue.behavior = harness::UeBehavior::BenignIperf;
  ue.rateMbps = 5.0;
  cfg.ues = {ue};
  harness::UeProfile web = ue;
  web.ueIpv4Addr = "10.45.0.4";
  web.pduSessionId = 3;
  web.behavior = harness::UeBehavior::BenignWeb;
  cfg.ues.push_back(web);

  harness::ScenarioRunner runner(cfg);
  util::EventLog events;
  harness::RunResult rr = runner.run_once(1, 0, events);
  CHECK_FALSE(rr.released);
  CHECK(rr.falsePositiveUes.empty());
  CHECK_FALSE(rr.breakdown.complete());
  fs::remove_all(runner.scratch_dir());
}

TEST_CASE("multiproc mode: full closed loop across separate processes") {
  const std::string toolsDir = CLOOP_TOOLS_DIR;
  REQUIRE_FALSE(toolsDir.empty());

  harness::ScenarioConfig cfg;
  cfg.mode = "multiproc";
  cfg.binDir = toolsDir;
  cfg.servers = servers(20);
  cfg.durationSeconds = 15.0;
  cfg.collectionPeriodSeconds = 1;
  cfg.ues = {bot_profile()};
  harness::UeProfile benign;
  benign.ueIpv4Addr = "10.45.0.3";
  benign.pduSessionId = 2;
  benign.behavior = harness::UeBehavior::BenignIperf;
  benign.rateMbps = 5.0;
  benign.seed = 3;
  cfg.ues.push_back(benign);

  harness::ScenarioRunner runner(cfg);
  util::EventLog events;
  harness::RunResult rr = runner.run_once(1, 0, events);
  CHECK(rr.released);
  CHECK(rr.breakdown.complete());
  CHECK(rr.breakdown.ordered());
  CHECK(rr.postReleaseProbeSuccesses == 0);
  fs::remove_all(runner.scratch_dir());
}
