#include <doctest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/nwdaf/service.hpp"
#include "cloop/nwdaf/store.hpp"
#include "cloop/upf/service.hpp"

using namespace cloop;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ees::Notification sample_notification(const std::string& subId, const std::string& ue,
                                      const std::string& ts) {
  ees::Notification n;
  n.subscriptionId = subId;
  n.eventType = ees::EventType::UserDataUsageMeasures;
  n.ueIpv4Addr = ue;
  n.snssai = {1, "000001"};
  n.timeStamp = util::parse_rfc3339(ts);
  n.startTime = n.timeStamp - std::chrono::seconds(3);
  ees::UsageMeasurementItem item;
  ees::FlowKey flow{ue, "10.9.0.1", 40000, 80, ees::FlowDirection::Bidirectional};
  item.flowInfo = ees::FlowInfo{ees::make_pack_filt_id(flow), ees::FlowDirection::Bidirectional};
  ees::VolumeMeasurement v;
  v.ulVolume = 600;
  v.dlVolume = 400;
  v.totalVolume = 1000;
  v.ulNbOfPackets = 6;
  v.dlNbOfPackets = 4;
  v.totalNbOfPackets = 10;
  item.volumeMeasurement = v;
  n.userDataUsageMeasurements.push_back(std::move(item));
  return n;
}

nwdaf::StoredUsageReport stored(const std::string& subId, const std::string& ue,
                                const std::string& ts) {
  nwdaf::StoredUsageReport r;
  r.notification = sample_notification(subId, ue, ts);
  r.receivedAt = r.notification.timeStamp;
  r.sourceUpf = "upf-1";
  return r;
}

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/cloop-test-" + name + "-" +
                                                    std::to_string(::getpid()) + ".jsonl") {
    fs::remove(path);
  }
  ~TempPath() { fs::remove(path); }
};

// scripted engine for NBI tests
struct StubEngine : nwdaf::AnalyticsEngine {
  nwdaf::AnalysisOutcome next;
  size_t calls = 0;
  nwdaf::AnalysisOutcome analyze(util::SysTime, util::SysTime) override {
    ++calls;
    return next;
  }
};

}  // namespace

TEST_CASE("report store: append, dedup, query, reload") {
  TempPath tmp("store");
  {
    nwdaf::ReportStore store(tmp.path);
    CHECK(store.append(stored("sub-1", "10.42.0.2", "2025-03-27T18:00:03Z")));
    CHECK(store.append(stored("sub-1", "10.42.0.2", "2025-03-27T18:00:06Z")));
    CHECK(store.append(stored("sub-1", "10.42.0.3", "2025-03-27T18:00:05Z")));
    // duplicate delivery: same subscription + timestamp
    CHECK_FALSE(store.append(stored("sub-1", "10.42.0.2", "2025-03-27T18:00:03Z")));
    CHECK(store.size() == 3);

    SUBCASE("window and ue filters") {
      auto all = store.query(util::parse_rfc3339("2025-03-27T18:00:00Z"),
                             util::parse_rfc3339("2025-03-27T19:00:00Z"));
      REQUIRE(all.size() == 3);
      CHECK(all[0].notification.timeStamp <= all[1].notification.timeStamp);
      CHECK(all[1].notification.timeStamp <= all[2].notification.timeStamp);

      auto empty = store.query(util::parse_rfc3339("2025-03-27T17:00:00Z"),
                               util::parse_rfc3339("2025-03-27T17:59:00Z"));
      CHECK(empty.empty());

      auto ueOnly = store.query(util::parse_rfc3339("2025-03-27T18:00:00Z"),
                                util::parse_rfc3339("2025-03-27T19:00:00Z"),
                                std::string("10.42.0.2"));
      REQUIRE(ueOnly.size() == 2);
      for (const auto& r : ueOnly) CHECK(r.notification.ueIpv4Addr == "10.42.0.2");
    }
  }
  // acknowledged reports survive a restart
  nwdaf::ReportStore reopened(tmp.path);
  CHECK(reopened.size() == 3);
  CHECK_FALSE(reopened.append(stored("sub-1", "10.42.0.2", "2025-03-27T18:00:03Z")));
  CHECK(reopened.earliest_timestamp() == util::parse_rfc3339("2025-03-27T18:00:03Z"));
}

TEST_CASE("nwdaf service: callback ingestion and queries") {
  TempPath tmp("svc");
  nwdaf::NwdafConfig cfg;
  cfg.storePath = tmp.path;
  nwdaf::NwdafService svc(cfg);
  REQUIRE(svc.start());

  httplib::Client client("127.0.0.1", svc.port());
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);

  SUBCASE("valid notification stored once, duplicates and garbage rejected") {
    const std::string body =
        ees::encode_notification(sample_notification("sub-1", "10.42.0.2", "2025-03-27T18:00:03Z"));
    CHECK(client.Post("/sbi/notify", body, "application/json")->status == 204);
    CHECK(client.Post("/sbi/notify", body, "application/json")->status == 204);  // dedup inside
    CHECK(svc.store().size() == 1);

    CHECK(client.Post("/sbi/notify", "{not json", "application/json")->status == 400);
    json bad = json::parse(body);
    bad["timeStamp"] = "2020-01-01T00:00:00Z";  // before startTime
    CHECK(client.Post("/sbi/notify", bad.dump(), "application/json")->status == 400);
    CHECK(svc.store().size() == 1);

    auto res = client.Get("/store/reports?ue=10.42.0.2");
    REQUIRE(res);
    CHECK(json::parse(res->body).size() == 1);
    CHECK(json::parse(client.Get("/store/reports?ue=10.42.0.9")->body).empty());
  }

  SUBCASE("report observer fires on fresh reports only") {
    int observed = 0;
    svc.set_report_observer([&](const nwdaf::StoredUsageReport&) { ++observed; });
    const std::string body =
        ees::encode_notification(sample_notification("sub-2", "10.42.0.2", "2025-03-27T18:10:00Z"));
    client.Post("/sbi/notify", body, "application/json");
    client.Post("/sbi/notify", body, "application/json");
    CHECK(observed == 1);
  }

  svc.stop();
}

TEST_CASE("nbi dispatch: filtering, negative reports, engine failures") {
  TempPath tmp("nbi");
  nwdaf::NwdafConfig cfg;
  cfg.storePath = tmp.path;
  cfg.dispatchIntervalMs = 20;
  nwdaf::NwdafService svc(cfg);
  StubEngine engine;
  svc.set_engine(nwdaf::AnalyticsEventId::AbnormalBehaviour, &engine);
  REQUIRE(svc.start());

  // notification receiver standing in for the SMF
  httplib::Server receiver;
  std::mutex mx;
  std::vector<nwdaf::AbnormalBehaviourNotification> received;
  receiver.Post("/smf/notify", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lk(mx);
    received.push_back(nwdaf::decode_abnormal_notification(req.body));
    res.status = 204;
  });
  const int port = receiver.bind_to_any_port("127.0.0.1");
  std::thread rt([&] { receiver.listen_after_bind(); });
  receiver.wait_until_ready();

  auto wait_received = [&](size_t n, double seconds) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    while (std::chrono::steady_clock::now() < deadline) {
      {
        std::lock_guard lk(mx);
        if (received.size() >= n) return true;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return false;
  };

  nwdaf::DetectionResult ddos;
  ddos.ueIpv4Addr = "10.42.0.2";
  ddos.anomalous = true;
  ddos.confidence = 0.9;
  ddos.excepId = nwdaf::ExceptionId::SuspicionOfDdosAttack;

  SUBCASE("anomaly and negative reports flow to the consumer") {
    engine.next.results = {ddos};
    nwdaf::AnalyticsSubscription sub;
    sub.eventId = nwdaf::AnalyticsEventId::AbnormalBehaviour;
    sub.notifyUri = "http://127.0.0.1:" + std::to_string(port) + "/smf/notify";
    sub.periodSeconds = 1;
    svc.nbi_subscribe(sub);
    REQUIRE(wait_received(1, 5.0));
    {
      std::lock_guard lk(mx);
      REQUIRE(received[0].exceptions.size() == 1);
      CHECK(received[0].exceptions[0].ueIpv4Addrs ==
            std::vector<std::string>{"10.42.0.2"});
      CHECK(received[0].exceptions[0].excepId == nwdaf::ExceptionId::SuspicionOfDdosAttack);
    }
    // engine goes quiet: negative reports keep coming
    engine.next.results.clear();
    const size_t before = [&] {
      std::lock_guard lk(mx);
      return received.size();
    }();
    REQUIRE(wait_received(before + 1, 5.0));
    {
      std::lock_guard lk(mx);
      CHECK(received.back().exceptions.empty());
    }
  }

  SUBCASE("exception filter suppresses non-matching results") {
    engine.next.results = {ddos};
    nwdaf::AnalyticsSubscription sub;
    sub.eventId = nwdaf::AnalyticsEventId::AbnormalBehaviour;
    sub.exceptionIds = std::set{nwdaf::ExceptionId::UnexpectedUeLocation};
    sub.notifyUri = "http://127.0.0.1:" + std::to_string(port) + "/smf/notify";
    sub.periodSeconds = 1;
    svc.nbi_subscribe(sub);
    REQUIRE(wait_received(1, 5.0));
    std::lock_guard lk(mx);
    CHECK(received[0].exceptions.empty());
  }

  SUBCASE("engine failure skips the tick and counts") {
    engine.next.status = nwdaf::AnalysisOutcome::Status::NoModel;
    nwdaf::AnalyticsSubscription sub;
    sub.eventId = nwdaf::AnalyticsEventId::AbnormalBehaviour;
    sub.notifyUri = "http://127.0.0.1:" + std::to_string(port) + "/smf/notify";
    sub.periodSeconds = 1;
    svc.nbi_subscribe(sub);
    std::this_thread::sleep_for(std::chrono::milliseconds(2600));
    CHECK(svc.engine_errors() >= 1);
    std::lock_guard lk(mx);
    CHECK(received.empty());
  }

  svc.stop();
  receiver.stop();
  rt.join();
}

TEST_CASE("nbi http surface and one-shot analytics") {
  TempPath tmp("nbi2");
  nwdaf::NwdafConfig cfg;
  cfg.storePath = tmp.path;
  nwdaf::NwdafService svc(cfg);
  StubEngine engine;
  nwdaf::DetectionResult r;
  r.ueIpv4Addr = "10.42.0.7";
  r.anomalous = true;
  r.confidence = 0.8;
  engine.next.results = {r};
  svc.set_engine(nwdaf::AnalyticsEventId::AbnormalBehaviour, &engine);
  REQUIRE(svc.start());

  httplib::Client client("127.0.0.1", svc.port());
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);

  // subscribe + unsubscribe over HTTP
  auto sub = client.Post(
      "/nnwdaf-eventssubscription/v1/subscriptions",
      json{{"eventId", "ABNORMAL_BEHAVIOUR"}, {"notifyUri", "http://127.0.0.1:1/x"},
           {"periodSeconds", 30}}
          .dump(),
      "application/json");
  REQUIRE(sub);
  REQUIRE(sub->status == 201);
  const std::string id = json::parse(sub->body)["subscriptionId"];
  CHECK(client.Delete("/nnwdaf-eventssubscription/v1/subscriptions/" + id)->status == 204);
  CHECK(client.Delete("/nnwdaf-eventssubscription/v1/subscriptions/" + id)->status == 404);

  // unsupported event id
  auto bad = client.Post("/nnwdaf-eventssubscription/v1/subscriptions",
                         json{{"eventId", "NF_LOAD"}, {"notifyUri", "http://127.0.0.1:1/x"},
                              {"periodSeconds", 1}}
                             .dump(),
                         "application/json");
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["error"] == "UNSUPPORTED_EVENT_ID");

  // one-shot request/response sharing the dispatch path
  auto oneShot = client.Get("/nnwdaf-analyticsinfo/v1/analytics?event-id=ABNORMAL_BEHAVIOUR");
  REQUIRE(oneShot);
  REQUIRE(oneShot->status == 200);
  auto notif = nwdaf::decode_abnormal_notification(oneShot->body);
  REQUIRE(notif.exceptions.size() == 1);
  CHECK(notif.exceptions[0].ueIpv4Addrs == std::vector<std::string>{"10.42.0.7"});

  CHECK(client.Get("/nnwdaf-analyticsinfo/v1/analytics?event-id=WHATEVER")->status == 400);

  svc.stop();
}

TEST_CASE("sbi client subscribes to the upf and keeps retrying when it is down") {
  TempPath tmp("sbi");

  SUBCASE("upf reachable: subscription established with the configured period") {
    upf::UpfServiceConfig ucfg;
    ucfg.ingestPort = -1;
    upf::UpfService upfsvc(ucfg);
    REQUIRE(upfsvc.start());

    nwdaf::NwdafConfig cfg;
    cfg.storePath = tmp.path;
    cfg.upfUri = upfsvc.base_uri();
    cfg.collectionPeriodS = 3;
    nwdaf::NwdafService svc(cfg);
    REQUIRE(svc.start());
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (!svc.sbi_subscribed() && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    REQUIRE(svc.sbi_subscribed());
    auto subs = upfsvc.core().subscriptions();
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].accepted.reporting.periodSeconds == 3);
    CHECK(subs[0].accepted.granularity == ees::Granularity::PerFlow);
    CHECK(subs[0].subscriptionId == svc.sbi_subscription_id());
    svc.stop();
    upfsvc.stop();
  }

  SUBCASE("upf down: retrying state, no crash") {
    nwdaf::NwdafConfig cfg;
    cfg.storePath = tmp.path;
    cfg.upfUri = "http://127.0.0.1:1";  // nothing listens there
    nwdaf::NwdafService svc(cfg);
    REQUIRE(svc.start());
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    CHECK_FALSE(svc.sbi_subscribed());
    httplib::Client client("127.0.0.1", svc.port());
    CHECK(client.Get("/healthz")->status == 200);
    svc.stop();
  }
}
