#include "cloop/harness/flowdata.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cloop/util/ipv4.hpp"
#include "cloop/util/log.hpp"

namespace cloop::harness {

std::vector<LabeledNodeFeatures> ingest_flow_csv(const std::string& path, FlowCsvStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  engine::CommGraph graph;
  std::set<std::string> sources;
  std::set<std::string> botSources;
  FlowCsvStats local;

  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("srcIp") != std::string::npos) continue;  // header row optional
    }
    std::stringstream ss(line);
    std::string srcIp, dstIp, srcPort, dstPort, packets, bytes, label;
    if (!std::getline(ss, srcIp, ',') || !std::getline(ss, dstIp, ',') ||
        !std::getline(ss, srcPort, ',') || !std::getline(ss, dstPort, ',') ||
        !std::getline(ss, packets, ',') || !std::getline(ss, bytes, ',') ||
        !std::getline(ss, label, ',')) {
      ++local.malformedRows;
      continue;
    }
    uint64_t pkts = 0;
    int lab = 0;
    try {
      pkts = std::stoull(packets);
      (void)std::stoull(bytes);
      (void)std::stoi(srcPort);
      (void)std::stoi(dstPort);
      lab = std::stoi(label);
    } catch (const std::exception&) {
      ++local.malformedRows;
      continue;
    }
    if (!util::is_ipv4(srcIp) || !util::is_ipv4(dstIp) || (lab != 0 && lab != 1) || pkts == 0) {
      ++local.malformedRows;
      continue;
    }
    graph.add_edge(srcIp, dstIp, pkts);
    graph.add_node(srcIp);
    sources.insert(srcIp);
    if (lab == 1) botSources.insert(srcIp);
    ++local.rows;
  }

  auto features = engine::extract_features(graph);
  std::vector<LabeledNodeFeatures> out;
  for (const std::string& src : sources) {
    LabeledNodeFeatures row;
    row.node = src;
    row.features = features.at(src).to_vector();
    row.label = botSources.count(src) ? 1 : 0;
    out.push_back(std::move(row));
  }
  if (stats) *stats = local;
  return out;
}

mlprov::Dataset to_dataset(const std::vector<LabeledNodeFeatures>& rows) {
  mlprov::Dataset data;
  for (const LabeledNodeFeatures& r : rows) {
    data.rows.emplace_back(r.features.begin(), r.features.end());
    data.labels.push_back(r.label);
  }
  return data;
}

namespace {

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Row {
  std::string srcIp, dstIp;
  int srcPort, dstPort;
  uint64_t packets, bytes;
  int label;
};

}  // namespace

void generate_synthetic_flow_csv(const std::string& path, const SynthParams& params) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);

  uint64_t state = mix(params.seed + 0x5eedULL);
  auto rnd = [&state]() { return state = mix(state); };
  auto between = [&](uint64_t lo, uint64_t hi) { return lo + rnd() % (hi - lo + 1); };

  std::vector<std::string> servers;
  for (int i = 0; i < params.servers; ++i) servers.push_back("10.9.0." + std::to_string(i + 1));
  const std::string pingTarget = "10.9.255.1";

  std::vector<Row> rows;
  auto emit = [&rows](std::string src, std::string dst, int sp, int dp, uint64_t pkts,
                      uint64_t bytes, int label) {
    rows.push_back(Row{std::move(src), std::move(dst), sp, dp, pkts, bytes, label});
  };

  for (int i = 0; i < params.benignUes; ++i) {
    const std::string ue = "10.42." + std::to_string(i / 250) + "." + std::to_string(i % 250 + 2);
    // sample each UE at a random point of its session so partially observed
    // (just-started, quiet) states are represented, matching what the live
    // detector sees mid-collection
    const double progress = static_cast<double>(between(1, 100)) / 100.0;
    const bool idle = rnd() % 8 == 0;  // only the ping-like flow so far
    if (!idle && rnd() % 2 == 0) {
      // bulk uplink flow, iperf-like: one fat pipe plus acks back
      const std::string& srv = servers[rnd() % servers.size()];
      const uint64_t pkts = std::max<uint64_t>(40, static_cast<uint64_t>(60000 * progress));
      emit(ue, srv, 52000 + i % 1000, 5201, pkts, pkts * 1250, 0);
      emit(srv, ue, 5201, 52000 + i % 1000, std::max<uint64_t>(1, pkts / 20), pkts / 20 * 66, 0);
    } else if (!idle) {
      // web-like: a few servers, moderate request/response volumes
      const size_t fanout = 1 + rnd() % 3;
      for (size_t f = 0; f < fanout; ++f) {
        const std::string& srv = servers[f % servers.size()];
        const uint64_t req = std::max<uint64_t>(2, static_cast<uint64_t>(300 * progress));
        emit(ue, srv, static_cast<int>(40000 + between(0, 4000)), 80, req, req * 400, 0);
        emit(srv, ue, 80, 40000, req * between(2, 5), req * 5000, 0);
      }
    }
    // ping-like side flow mirroring the live probe loop (no response)
    const uint64_t pings = std::max<uint64_t>(1, static_cast<uint64_t>(120 * progress));
    emit(ue, pingTarget, 4000, 7, pings, pings * 64, 0);
  }

  for (int b = 0; b < params.botUes; ++b) {
    const std::string ue = "10.43." + std::to_string(b / 250) + "." + std::to_string(b % 250 + 2);
    // ongoing scans at various stages of progress
    const size_t targets = between(8, std::min<uint64_t>(30, servers.size()));
    std::vector<size_t> order(servers.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (size_t k = 0; k + 1 < order.size(); ++k) {
      std::swap(order[k], order[k + between(0, order.size() - k - 1)]);
    }
    for (size_t t = 0; t < targets; ++t) {
      const std::string& srv = servers[order[t]];
      const uint64_t probes = between(1, 3);
      emit(ue, srv, static_cast<int>(50000 + between(0, 8000)), 8080, probes, probes * 74, 1);
      if (rnd() % 3 != 0) emit(srv, ue, 8080, 50000, 1, 54, 0);  // some targets answer
    }
    const uint64_t pings = between(1, 60);
    emit(ue, pingTarget, 4000, 7, pings, pings * 64, 1);
  }

  out << "srcIp,dstIp,srcPort,dstPort,packets,bytes,label\n";
  for (const Row& r : rows) {
    out << r.srcIp << ',' << r.dstIp << ',' << r.srcPort << ',' << r.dstPort << ',' << r.packets
        << ',' << r.bytes << ',' << r.label << '\n';
  }
}

}  // namespace cloop::harness
