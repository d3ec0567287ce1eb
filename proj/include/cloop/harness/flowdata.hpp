#pragma once

#include <array>
#include <string>
#include <vector>

#include "cloop/engine/graph.hpp"
#include "cloop/mlprov/forest.hpp"

namespace cloop::harness {

struct LabeledNodeFeatures {
  std::string node;
  std::array<double, 5> features{};
  int label = 0;
};

struct FlowCsvStats {
  size_t rows = 0;
  size_t malformedRows = 0;  // skipped
};

/// Flow-record CSV reader (columns srcIp,dstIp,srcPort,dstPort,packets,
/// bytes,label). Builds the communication graph and emits one labeled
/// feature row per distinct source IP; a node is labeled 1 when any labeled
/// flow it sources is. Malformed rows are skipped and counted.
std::vector<LabeledNodeFeatures> ingest_flow_csv(const std::string& path,
                                                 FlowCsvStats* stats = nullptr);

mlprov::Dataset to_dataset(const std::vector<LabeledNodeFeatures>& rows);

struct SynthParams {
  int benignUes = 200;
  int botUes = 50;
  int servers = 40;
  uint64_t seed = 1;
};

/// Labeled synthetic traffic corpus in the flow-record CSV schema: benign
/// UEs run bulk or web-like exchanges against a few servers, bots sweep
/// many distinct servers with tiny probe flows. Every UE also carries one
/// low-volume ping-like flow, mirroring the live probe loop.
void generate_synthetic_flow_csv(const std::string& path, const SynthParams& params);

}  // namespace cloop::harness
