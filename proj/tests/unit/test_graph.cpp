#include <doctest.h>

#include <random>

#include "../support/brute_betweenness.hpp"
#include "cloop/ees/codec.hpp"
#include "cloop/engine/graph.hpp"
#include "cloop/upf/upf.hpp"

using namespace cloop;

TEST_CASE("degrees and parallel edge merging") {
  engine::CommGraph g;
  g.add_edge("b", "a", 2);
  g.add_edge("a", "c", 3);

  auto da = g.degrees("a");
  CHECK(da.inDegree == 1);
  CHECK(da.outDegree == 1);
  CHECK(da.weightedInDegree == 2);
  CHECK(da.weightedOutDegree == 3);

  SUBCASE("parallel edges merge by summing") {
    g.add_edge("a", "b", 1);
    g.add_edge("a", "b", 4);
    auto d = g.degrees("a");
    CHECK(d.outDegree == 2);  // c and b
    CHECK(d.weightedOutDegree == 3 + 5);
    CHECK(g.out_edges(g.index_of("a")).at(g.index_of("b")) == 5);
  }

  SUBCASE("self loops and zero weights dropped") {
    g.add_edge("a", "a", 7);
    g.add_edge("a", "c", 0);
    auto d = g.degrees("a");
    CHECK(d.outDegree == 1);
    CHECK(d.weightedOutDegree == 3);
  }

  SUBCASE("isolated node") {
    g.add_node("lonely");
    auto d = g.degrees("lonely");
    CHECK(d.inDegree == 0);
    CHECK(d.outDegree == 0);
    CHECK(d.weightedInDegree == 0);
    CHECK(d.weightedOutDegree == 0);
  }

  CHECK_THROWS_AS(g.degrees("nope"), std::out_of_range);
}

TEST_CASE("betweenness on hand-checked shapes") {
  SUBCASE("a->b->c gives b exactly one transit pair") {
    engine::CommGraph g;
    g.add_edge("a", "b", 5);
    g.add_edge("b", "c", 2);
    auto bc = engine::weighted_betweenness(g);
    CHECK(bc["b"] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bc["a"] == doctest::Approx(0.0));
    CHECK(bc["c"] == doctest::Approx(0.0));
  }

  SUBCASE("fan-out relay: b->a, a->c, a->d") {
    engine::CommGraph g;
    g.add_edge("b", "a", 1);
    g.add_edge("a", "c", 1);
    g.add_edge("a", "d", 1);
    auto bc = engine::weighted_betweenness(g);
    CHECK(bc["a"] == doctest::Approx(2.0).epsilon(1e-12));  // (b,c) and (b,d)
    CHECK(bc["b"] == doctest::Approx(0.0));
  }

  SUBCASE("two equal shortest paths split the credit") {
    engine::CommGraph g;
    g.add_edge("s", "x", 2);
    g.add_edge("x", "t", 2);
    g.add_edge("s", "y", 2);
    g.add_edge("y", "t", 2);
    auto bc = engine::weighted_betweenness(g);
    CHECK(bc["x"] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bc["y"] == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("heavier edges are shorter: traffic prefers the loaded relay") {
    engine::CommGraph g;
    g.add_edge("s", "x", 10);
    g.add_edge("x", "t", 10);
    g.add_edge("s", "y", 1);
    g.add_edge("y", "t", 1);
    auto bc = engine::weighted_betweenness(g);
    CHECK(bc["x"] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bc["y"] == doctest::Approx(0.0));
  }

  SUBCASE("empty graph") {
    engine::CommGraph g;
    CHECK(engine::weighted_betweenness(g).empty());
  }
}

TEST_CASE("betweenness matches exhaustive enumeration on an 8-node seed-42 digraph") {
  std::mt19937_64 rng(42);
  engine::CommGraph g = testoracle::random_digraph(rng, 8);
  auto brandes = engine::weighted_betweenness(g);
  auto brute = testoracle::brute_betweenness(g);
  REQUIRE(brandes.size() == brute.size());
  for (const auto& [node, expected] : brute) {
    CHECK(brandes.at(node) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("weight scaling leaves structure and betweenness unchanged") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    engine::CommGraph g = testoracle::random_digraph(rng, 7);
    const uint64_t k = 1 + rng() % 9;
    engine::CommGraph scaled;
    for (const auto& name : g.nodes()) scaled.add_node(name);
    for (size_t i = 0; i < g.node_count(); ++i) {
      for (const auto& [dst, w] : g.out_edges(static_cast<int>(i))) {
        scaled.add_edge(g.node_name(static_cast<int>(i)), g.node_name(dst), w * k);
      }
    }
    auto f0 = engine::extract_features(g);
    auto f1 = engine::extract_features(scaled);
    for (const auto& [name, feat] : f0) {
      const auto& other = f1.at(name);
      CHECK(other.inDegree == feat.inDegree);
      CHECK(other.outDegree == feat.outDegree);
      CHECK(other.weightedInDegree == feat.weightedInDegree * k);
      CHECK(other.weightedOutDegree == feat.weightedOutDegree * k);
      CHECK(other.weightedBetweenness ==
            doctest::Approx(feat.weightedBetweenness).epsilon(1e-9));
    }
  }
}

namespace {

nwdaf::StoredUsageReport make_report(const std::string& ue, const ees::FlowKey& flow,
                                     uint64_t ulPkts, uint64_t dlPkts) {
  nwdaf::StoredUsageReport r;
  r.notification.subscriptionId = "sub-1";
  r.notification.ueIpv4Addr = ue;
  r.notification.snssai = {1, "000001"};
  r.notification.startTime = util::parse_rfc3339("2025-03-27T18:00:00Z");
  r.notification.timeStamp = util::parse_rfc3339("2025-03-27T18:00:03Z");
  ees::UsageMeasurementItem item;
  item.flowInfo = ees::FlowInfo{ees::make_pack_filt_id(flow), ees::FlowDirection::Bidirectional};
  ees::VolumeMeasurement v;
  v.ulNbOfPackets = ulPkts;
  v.dlNbOfPackets = dlPkts;
  v.totalNbOfPackets = ulPkts + dlPkts;
  v.ulVolume = ulPkts * 100;
  v.dlVolume = dlPkts * 100;
  v.totalVolume = v.ulVolume + v.dlVolume;
  item.volumeMeasurement = v;
  r.notification.userDataUsageMeasurements.push_back(std::move(item));
  r.receivedAt = r.notification.timeStamp;
  r.sourceUpf = "upf-1";
  return r;
}

}  // namespace

TEST_CASE("communication graph built from stored reports") {
  ees::FlowKey flow{"10.42.0.2", "10.9.0.1", 40000, 80, ees::FlowDirection::Bidirectional};

  SUBCASE("single flow: uplink and downlink edges") {
    auto r = make_report("10.42.0.2", flow, 5, 3);
    engine::CommGraph g = engine::build_comm_graph(std::span(&r, 1));
    CHECK(g.node_count() == 2);
    CHECK(g.degrees("10.42.0.2").weightedOutDegree == 5);
    CHECK(g.degrees("10.42.0.2").weightedInDegree == 3);
    CHECK(g.degrees("10.9.0.1").weightedOutDegree == 3);
  }

  SUBCASE("empty input gives empty graph") {
    engine::CommGraph g = engine::build_comm_graph({});
    CHECK(g.node_count() == 0);
  }

  SUBCASE("scan fan-out: 20 distinct destinations") {
    std::vector<nwdaf::StoredUsageReport> reports;
    for (int i = 0; i < 20; ++i) {
      ees::FlowKey f{"10.42.0.9", "10.9.0." + std::to_string(i + 1), 50000,
                     static_cast<uint16_t>(8080), ees::FlowDirection::Bidirectional};
      reports.push_back(make_report("10.42.0.9", f, 1, 0));
    }
    engine::CommGraph g = engine::build_comm_graph(reports);
    CHECK(g.degrees("10.42.0.9").outDegree == 20);
    auto feats = engine::extract_features(g);
    auto v = feats.at("10.42.0.9").to_vector();
    CHECK(v[0] == 0);   // inDegree
    CHECK(v[1] == 20);  // outDegree
    CHECK(v[2] == 0);
    CHECK(v[3] == 20);
    CHECK(v[4] == 0.0);
  }

  SUBCASE("shuffling the report list yields an identical graph") {
    std::vector<nwdaf::StoredUsageReport> reports;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
      ees::FlowKey f{"10.42.0." + std::to_string(1 + i % 4), "10.9.0." + std::to_string(1 + i % 7),
                     static_cast<uint16_t>(1000 + i), 80, ees::FlowDirection::Bidirectional};
      reports.push_back(make_report(f.srcIp, f, 1 + i % 5, i % 3));
    }
    engine::CommGraph g1 = engine::build_comm_graph(reports);
    std::shuffle(reports.begin(), reports.end(), rng);
    engine::CommGraph g2 = engine::build_comm_graph(reports);
    REQUIRE(g1.node_count() == g2.node_count());
    // identical edge sets and weights
    for (const auto& name : g1.nodes()) {
      for (const auto& [dst, w] : g1.out_edges(g1.index_of(name))) {
        CHECK(g2.out_edges(g2.index_of(name)).at(g2.index_of(g1.node_name(dst))) == w);
      }
    }
    CHECK(g1.edge_count() == g2.edge_count());
    auto f1 = engine::extract_features(g1);
    auto f2 = engine::extract_features(g2);
    for (const auto& [name, feat] : f1) {
      const auto& other = f2.at(name);
      CHECK(other.inDegree == feat.inDegree);
      CHECK(other.outDegree == feat.outDegree);
      CHECK(other.weightedInDegree == feat.weightedInDegree);
      CHECK(other.weightedOutDegree == feat.weightedOutDegree);
      // float accumulation order may differ once node numbering changes
      CHECK(other.weightedBetweenness ==
            doctest::Approx(feat.weightedBetweenness).epsilon(1e-9));
    }
  }

  SUBCASE("items without flow info are skipped and counted") {
    auto r = make_report("10.42.0.2", flow, 5, 3);
    r.notification.userDataUsageMeasurements[0].flowInfo.reset();
    engine::GraphBuildStats stats;
    engine::CommGraph g = engine::build_comm_graph(std::span(&r, 1), &stats);
    CHECK(g.node_count() == 0);
    CHECK(stats.reportsSkipped == 1);
    CHECK(stats.itemsSkipped == 1);
  }
}
