#include "cloop/engine/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "cloop/ees/codec.hpp"

namespace cloop::engine {

int CommGraph::add_node(const std::string& ip) {
  auto it = index_.find(ip);
  if (it != index_.end()) return it->second;
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(ip);
  index_.emplace(ip, idx);
  out_.emplace_back();
  in_.emplace_back();
  return idx;
}

void CommGraph::add_edge(const std::string& src, const std::string& dst, uint64_t packets) {
  if (packets == 0 || src == dst) return;
  const int s = add_node(src);
  const int d = add_node(dst);
  out_[static_cast<size_t>(s)][d] += packets;
  in_[static_cast<size_t>(d)][s] += packets;
}

size_t CommGraph::edge_count() const {
  size_t n = 0;
  for (const auto& adj : out_) n += adj.size();
  return n;
}

int CommGraph::index_of(const std::string& ip) const {
  auto it = index_.find(ip);
  if (it == index_.end()) throw std::out_of_range("unknown node " + ip);
  return it->second;
}

CommGraph::Degrees CommGraph::degrees(int idx) const {
  Degrees d;
  const auto& out = out_[static_cast<size_t>(idx)];
  const auto& in = in_[static_cast<size_t>(idx)];
  d.outDegree = static_cast<uint32_t>(out.size());
  d.inDegree = static_cast<uint32_t>(in.size());
  for (const auto& [_, w] : out) d.weightedOutDegree += w;
  for (const auto& [_, w] : in) d.weightedInDegree += w;
  return d;
}

CommGraph::Degrees CommGraph::degrees(const std::string& ip) const {
  return degrees(index_of(ip));
}

namespace {

// relative tolerance for "same shortest path length" under 1/w distances
constexpr double kPathEps = 1e-12;

bool close(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return a == b;
  return std::abs(a - b) <= kPathEps * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::unordered_map<std::string, double> weighted_betweenness(const CommGraph& g) {
  const size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);

  std::vector<double> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::vector<int>> preds(n);
  std::vector<int> order;  // settle order, non-decreasing distance
  std::vector<char> settled(n);

  using HeapItem = std::pair<double, int>;
  for (size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(settled.begin(), settled.end(), 0);
    for (auto& p : preds) p.clear();
    order.clear();

    dist[s] = 0.0;
    sigma[s] = 1.0;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
    heap.emplace(0.0, static_cast<int>(s));
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (settled[static_cast<size_t>(v)]) continue;
      settled[static_cast<size_t>(v)] = 1;
      order.push_back(v);
      for (const auto& [w, weight] : g.out_edges(v)) {
        const double nd = dist[static_cast<size_t>(v)] + 1.0 / static_cast<double>(weight);
        if (settled[static_cast<size_t>(w)]) continue;
        if (nd < dist[static_cast<size_t>(w)] && !close(nd, dist[static_cast<size_t>(w)])) {
          dist[static_cast<size_t>(w)] = nd;
          sigma[static_cast<size_t>(w)] = sigma[static_cast<size_t>(v)];
          preds[static_cast<size_t>(w)].assign(1, v);
          heap.emplace(nd, w);
        } else if (close(nd, dist[static_cast<size_t>(w)])) {
          sigma[static_cast<size_t>(w)] += sigma[static_cast<size_t>(v)];
          preds[static_cast<size_t>(w)].push_back(v);
        }
      }
    }

    // Brandes back-propagation over the shortest-path DAG
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (int v : preds[static_cast<size_t>(w)]) {
        delta[static_cast<size_t>(v)] += sigma[static_cast<size_t>(v)] /
                                         sigma[static_cast<size_t>(w)] *
                                         (1.0 + delta[static_cast<size_t>(w)]);
      }
      if (w != static_cast<int>(s)) bc[static_cast<size_t>(w)] += delta[static_cast<size_t>(w)];
    }
  }

  std::unordered_map<std::string, double> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out[g.node_name(static_cast<int>(i))] = bc[i];
  return out;
}

std::unordered_map<std::string, NodeFeatures> extract_features(const CommGraph& g) {
  std::unordered_map<std::string, double> bc = weighted_betweenness(g);
  std::unordered_map<std::string, NodeFeatures> out;
  out.reserve(g.node_count());
  for (size_t i = 0; i < g.node_count(); ++i) {
    const std::string& name = g.node_name(static_cast<int>(i));
    const CommGraph::Degrees d = g.degrees(static_cast<int>(i));
    NodeFeatures f;
    f.inDegree = d.inDegree;
    f.outDegree = d.outDegree;
    f.weightedInDegree = d.weightedInDegree;
    f.weightedOutDegree = d.weightedOutDegree;
    f.weightedBetweenness = bc[name];
    out.emplace(name, f);
  }
  return out;
}

CommGraph build_comm_graph(std::span<const nwdaf::StoredUsageReport> reports,
                           GraphBuildStats* stats) {
  CommGraph g;
  GraphBuildStats local;
  for (const nwdaf::StoredUsageReport& r : reports) {
    bool contributed = false;
    bool hadItems = false;
    for (const ees::UsageMeasurementItem& item : r.notification.userDataUsageMeasurements) {
      hadItems = true;
      if (!item.flowInfo || !item.volumeMeasurement) {
        ++local.itemsSkipped;
        continue;
      }
      auto flow = ees::parse_pack_filt_id(item.flowInfo->packFiltId);
      if (!flow) {
        ++local.itemsSkipped;
        continue;
      }
      const ees::VolumeMeasurement& vol = *item.volumeMeasurement;
      g.add_edge(flow->srcIp, flow->dstIp, vol.ulNbOfPackets);
      g.add_edge(flow->dstIp, flow->srcIp, vol.dlNbOfPackets);
      g.add_node(flow->srcIp);
      g.add_node(flow->dstIp);
      contributed = true;
    }
    if (hadItems && !contributed) ++local.reportsSkipped;
  }
  if (stats) *stats = local;
  return g;
}

}  // namespace cloop::engine
