// Scenario orchestrator and metrics CLI.
//
//   loop run --config scenario.toml [--out DIR]
//   loop bench --rates 10,50,100 [--out bench.csv]
//   loop train-data --out synth.csv --seed S [--benign N --bots M --features F]
//   loop report --in events.jsonl [--out DIR]

#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>

#include "cloop/harness/bench.hpp"
#include "cloop/harness/flowdata.hpp"
#include "cloop/harness/report.hpp"
#include "cloop/harness/scenario.hpp"
#include "cloop/mlprov/dataset.hpp"

namespace fs = std::filesystem;
using namespace cloop;

namespace {

int run_scenario_cmd(const std::string& configPath, const std::string& outDir,
                     const std::string& modeOverride, const std::string& intervalsCsv) {
  harness::ScenarioConfig cfg;
  try {
    cfg = harness::load_scenario_config(configPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "loop run: %s\n", e.what());
    return 1;
  }
  if (!modeOverride.empty()) cfg.mode = modeOverride;

  std::vector<int> intervals;
  if (intervalsCsv.empty()) {
    intervals.push_back(cfg.collectionPeriodSeconds);
  } else {
    std::stringstream ss(intervalsCsv);
    std::string tok;
    while (std::getline(ss, tok, ',')) intervals.push_back(std::stoi(tok));
  }

  fs::create_directories(outDir);
  harness::ScenarioRunner runner(cfg);
  std::printf("training detector on synthetic corpus (seed %llu)...\n",
              static_cast<unsigned long long>(cfg.trainSeed));
  runner.model();
  std::printf("holdout accuracy: %.4f\n", runner.holdout_accuracy());

  util::EventLog events;
  std::vector<harness::RunResult> results;
  try {
    results = runner.run_campaign(intervals, events);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "loop run: %s\n", e.what());
    events.write_jsonl(outDir + "/events.jsonl");
    return 1;
  }

  auto rows = harness::to_breakdown_rows(results);
  harness::write_breakdown_csv(outDir + "/breakdown.csv", rows);
  events.write_jsonl(outDir + "/events.jsonl");
  auto summaries = harness::summarize(rows);
  harness::write_summary_csv(outDir + "/summary.csv", summaries);
  std::printf("%s", harness::format_summary_table(summaries).c_str());
  std::printf("wrote %s/breakdown.csv, events.jsonl, summary.csv\n", outDir.c_str());

  size_t fps = 0;
  for (const auto& r : results) fps += r.falsePositiveUes.size();
  if (fps > 0) std::printf("benign UEs flagged across runs: %zu\n", fps);
  return 0;
}

int run_bench_cmd(const std::string& ratesCsv, const std::string& outPath) {
  std::vector<double> rates;
  std::stringstream ss(ratesCsv);
  std::string tok;
  while (std::getline(ss, tok, ',')) rates.push_back(std::stod(tok));

  const std::vector<harness::BenchVariant> variants = {harness::BenchVariant::BaselineNoEes,
                                                       harness::BenchVariant::Ees0Sub,
                                                       harness::BenchVariant::Ees1Sub};
  auto rows = harness::overhead_bench(rates, variants);
  harness::write_bench_csv(outPath, rows);
  std::printf("variant           offered(Mbit/s)  achieved(desc/s)  probe p50 (us)\n");
  for (const auto& r : rows) {
    std::printf("%-17s %15.1f %17.0f %15.3f\n", harness::to_token(r.variant), r.offeredMbps,
                r.achievedDescPerSec, r.probeLatencyP50Us);
  }
  std::printf("wrote %s\n", outPath.c_str());
  return 0;
}

int run_train_data_cmd(const std::string& outPath, uint64_t seed, int benign, int bots,
                       int servers, const std::string& featuresPath) {
  harness::SynthParams params;
  params.seed = seed;
  params.benignUes = benign;
  params.botUes = bots;
  params.servers = servers;
  harness::generate_synthetic_flow_csv(outPath, params);
  std::printf("wrote %s (%d benign UEs, %d bots, %d servers, seed %llu)\n", outPath.c_str(),
              benign, bots, servers, static_cast<unsigned long long>(seed));
  if (!featuresPath.empty()) {
    harness::FlowCsvStats stats;
    auto rows = harness::ingest_flow_csv(outPath, &stats);
    mlprov::write_features_csv(featuresPath, harness::to_dataset(rows));
    std::printf("wrote %s (%zu labeled nodes from %zu flows)\n", featuresPath.c_str(), rows.size(),
                stats.rows);
  }
  return 0;
}

int run_report_cmd(const std::string& inPath, const std::string& outDir) {
  std::vector<util::Event> events;
  try {
    events = util::EventLog::read_jsonl(inPath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "loop report: %s\n", e.what());
    return 1;
  }
  auto rows = harness::breakdown_from_events(events);
  if (rows.empty()) {
    std::fprintf(stderr, "loop report: no run_end events in %s\n", inPath.c_str());
    return 1;
  }
  fs::create_directories(outDir);
  harness::write_breakdown_csv(outDir + "/breakdown.csv", rows);
  auto summaries = harness::summarize(rows);
  harness::write_summary_csv(outDir + "/summary.csv", summaries);
  std::printf("%s", harness::format_summary_table(summaries).c_str());
  std::printf("wrote %s/breakdown.csv and summary.csv from %zu runs\n", outDir.c_str(),
              rows.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop scenario harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a closed-loop scenario campaign");
  std::string configPath, outDir = "out", mode, intervalsCsv;
  run->add_option("--config", configPath, "scenario.toml")->required();
  run->add_option("--out", outDir, "output directory");
  run->add_option("--mode", mode, "inproc|multiproc (overrides the config)")
      ->check(CLI::IsMember({"inproc", "multiproc"}));
  run->add_option("--intervals", intervalsCsv, "collection intervals, e.g. 1,3,5");

  auto* bench = app.add_subcommand("bench", "event-exposure overhead benchmark");
  std::string ratesCsv = "10,50,100", benchOut = "bench.csv";
  bench->add_option("--rates", ratesCsv, "offered rates in Mbit/s");
  bench->add_option("--out", benchOut, "output CSV");

  auto* trainData = app.add_subcommand("train-data", "generate the synthetic labeled corpus");
  std::string synthOut = "synth.csv", featuresOut;
  uint64_t seed = 1;
  int benign = 200, bots = 50, servers = 40;
  trainData->add_option("--out", synthOut, "flow-record CSV path");
  trainData->add_option("--seed", seed, "generator seed");
  trainData->add_option("--benign", benign, "benign UE count");
  trainData->add_option("--bots", bots, "bot UE count");
  trainData->add_option("--servers", servers, "server pool size");
  trainData->add_option("--features", featuresOut, "also emit the labeled feature CSV here");

  auto* report = app.add_subcommand("report", "rebuild breakdown/summary from an event log");
  std::string eventsIn, reportOut = "out";
  report->add_option("--in", eventsIn, "events.jsonl")->required();
  report->add_option("--out", reportOut, "output directory");

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return run_scenario_cmd(configPath, outDir, mode, intervalsCsv);
  if (bench->parsed()) return run_bench_cmd(ratesCsv, benchOut);
  if (trainData->parsed()) return run_train_data_cmd(synthOut, seed, benign, bots, servers,
                                                     featuresOut);
  return run_report_cmd(eventsIn, reportOut);
}
