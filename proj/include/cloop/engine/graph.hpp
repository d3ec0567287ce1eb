#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloop/nwdaf/types.hpp"

namespace cloop::engine {

/// Directed IP communication graph. Nodes are IPv4 addresses, edge weights
/// count transmitted packets. Parallel edges merge by summing weights,
/// self-loops and zero weights are dropped.
class CommGraph {
 public:
  int add_node(const std::string& ip);
  void add_edge(const std::string& src, const std::string& dst, uint64_t packets);

  size_t node_count() const { return nodes_.size(); }
  size_t edge_count() const;
  bool has_node(const std::string& ip) const { return index_.count(ip) > 0; }
  const std::vector<std::string>& nodes() const { return nodes_; }

  int index_of(const std::string& ip) const;  // throws std::out_of_range
  const std::string& node_name(int idx) const { return nodes_[static_cast<size_t>(idx)]; }

  /// Outgoing adjacency of a node, destination index -> weight.
  const std::map<int, uint64_t>& out_edges(int idx) const { return out_[static_cast<size_t>(idx)]; }

  struct Degrees {
    uint32_t inDegree = 0;
    uint32_t outDegree = 0;
    uint64_t weightedInDegree = 0;
    uint64_t weightedOutDegree = 0;
  };
  Degrees degrees(const std::string& ip) const;  // throws std::out_of_range
  Degrees degrees(int idx) const;

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::map<int, uint64_t>> out_;
  std::vector<std::map<int, uint64_t>> in_;
};

struct NodeFeatures {
  uint32_t inDegree = 0;
  uint32_t outDegree = 0;
  uint64_t weightedInDegree = 0;
  uint64_t weightedOutDegree = 0;
  double weightedBetweenness = 0.0;

  /// Fixed model-facing ordering: (inDegree, outDegree, wInDegree,
  /// wOutDegree, wBetweenness).
  std::array<double, 5> to_vector() const {
    return {static_cast<double>(inDegree), static_cast<double>(outDegree),
            static_cast<double>(weightedInDegree), static_cast<double>(weightedOutDegree),
            weightedBetweenness};
  }
};

/// Unnormalized weighted betweenness over directed shortest paths with edge
/// distance 1/weight, Brandes accumulation. Unreachable pairs contribute 0.
std::unordered_map<std::string, double> weighted_betweenness(const CommGraph& g);

std::unordered_map<std::string, NodeFeatures> extract_features(const CommGraph& g);

struct GraphBuildStats {
  size_t reportsSkipped = 0;  // reports that contributed nothing despite having items
  size_t itemsSkipped = 0;    // items without usable flowInfo + volume data
};

/// One node per distinct IP seen in any flow description; edge src->dst
/// weighted by uplink packet counts, dst->src by downlink counts. The result
/// is independent of report ordering.
CommGraph build_comm_graph(std::span<const nwdaf::StoredUsageReport> reports,
                           GraphBuildStats* stats = nullptr);

}  // namespace cloop::engine
