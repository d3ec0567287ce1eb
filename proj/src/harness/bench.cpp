#include "cloop/harness/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "cloop/ees/codec.hpp"
#include "cloop/upf/upf.hpp"
#include "cloop/util/time.hpp"

namespace cloop::harness {

const char* to_token(BenchVariant v) {
  switch (v) {
    case BenchVariant::BaselineNoEes: return "BASELINE_NO_EES";
    case BenchVariant::Ees0Sub: return "EES_0_SUB";
    case BenchVariant::Ees1Sub: return "EES_1_SUB";
  }
  return "?";
}

namespace {

struct BenchRig {
  upf::Upf upf;
  std::vector<upf::PacketDescriptor> batch;
  upf::PacketDescriptor probePkt;
  BenchVariant variant;
  std::thread notifier;
  std::atomic<bool> stopNotifier{false};

  BenchRig(BenchVariant v, const BenchOptions& opts) : variant(v) {
    upf.add_session(1, "10.42.0.2", ees::SnssaiId{1, "000001"});
    for (int i = 0; i < opts.flows; ++i) {
      upf::PacketDescriptor p;
      p.flow = ees::FlowKey{"10.42.0.2", "10.9.0." + std::to_string(1 + i % 32),
                            static_cast<uint16_t>(40000 + i), 80, ees::FlowDirection::Uplink};
      p.pduSessionId = 1;
      p.ueIpv4Addr = "10.42.0.2";
      p.sizeBytes = opts.descriptorBytes;
      p.direction = upf::PacketDirection::Uplink;
      p.kind = upf::PacketKind::Data;
      batch.push_back(std::move(p));
    }
    probePkt = batch[0];
    probePkt.kind = upf::PacketKind::Probe;
    probePkt.sizeBytes = 64;

    if (v == BenchVariant::Ees1Sub) {
      ees::SubscriptionRequest req;
      req.eventTypes = {ees::EventType::UserDataUsageMeasures};
      req.measurementTypes = {ees::MeasurementType::Volume};
      req.granularity = ees::Granularity::PerFlow;
      req.reporting.periodSeconds = 3;  // per-flow volume reports every 3 seconds
      req.notifyUri = "http://127.0.0.1:1/bench-sink";
      upf.subscribe(req);
      // notification generation runs alongside, as in live deployments;
      // delivery is out of scope for the ingest measurement
      notifier = std::thread([this] {
        while (!stopNotifier.load(std::memory_order_relaxed)) {
          (void)upf.notifier_tick(util::now_sys());
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
      });
    }
  }

  ~BenchRig() {
    stopNotifier.store(true);
    if (notifier.joinable()) notifier.join();
  }

  inline void ingest(const upf::PacketDescriptor& p) {
    if (variant == BenchVariant::BaselineNoEes) {
      upf.forward_baseline(p);
    } else {
      upf.ingest_packet(p);
    }
  }
};

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double one_saturating_trial(BenchRig& rig, double seconds) {
  const util::SteadyTime start = util::now_steady();
  const util::SteadyTime end =
      start + std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::duration<double>(seconds));
  uint64_t count = 0;
  size_t i = 0;
  while (true) {
    // check the clock once per batch sweep, not per descriptor
    for (size_t k = 0; k < rig.batch.size(); ++k) {
      rig.ingest(rig.batch[(i + k) % rig.batch.size()]);
    }
    count += rig.batch.size();
    i += 7;
    if (util::now_steady() >= end) break;
  }
  const double elapsed =
      std::chrono::duration<double>(util::now_steady() - start).count();
  return static_cast<double>(count) / elapsed;
}

}  // namespace

double saturating_rate(BenchVariant variant, const BenchOptions& opts) {
  BenchRig rig(variant, opts);
  one_saturating_trial(rig, 0.1);  // warm caches
  std::vector<double> rates;
  for (int t = 0; t < opts.trials; ++t) {
    rates.push_back(one_saturating_trial(rig, opts.secondsPerTrial));
  }
  return median(std::move(rates));
}

std::pair<double, double> saturating_rates_interleaved(BenchVariant a, BenchVariant b,
                                                       const BenchOptions& opts) {
  BenchRig rigA(a, opts);
  BenchRig rigB(b, opts);
  one_saturating_trial(rigA, 0.1);
  one_saturating_trial(rigB, 0.1);
  std::vector<double> ra, rb;
  for (int t = 0; t < opts.trials; ++t) {
    ra.push_back(one_saturating_trial(rigA, opts.secondsPerTrial));
    rb.push_back(one_saturating_trial(rigB, opts.secondsPerTrial));
  }
  return {median(std::move(ra)), median(std::move(rb))};
}

PacedResult paced_rate(BenchVariant variant, double descPerSec, const BenchOptions& opts) {
  BenchRig rig(variant, opts);
  PacedResult out;
  std::vector<double> probeLatUs;
  const double seconds = opts.secondsPerTrial * opts.trials;
  const util::SteadyTime start = util::now_steady();
  const util::SteadyTime end =
      start + std::chrono::duration_cast<std::chrono::nanoseconds>(
                  std::chrono::duration<double>(seconds));
  const auto gap = std::chrono::nanoseconds(static_cast<int64_t>(1e9 / descPerSec));
  util::SteadyTime next = start;
  util::SteadyTime nextProbe = start;
  uint64_t count = 0;
  size_t i = 0;
  while (util::now_steady() < end) {
    const util::SteadyTime now = util::now_steady();
    if (now >= nextProbe) {
      const util::SteadyTime p0 = util::now_steady();
      rig.ingest(rig.probePkt);
      probeLatUs.push_back(
          std::chrono::duration<double, std::micro>(util::now_steady() - p0).count());
      nextProbe += std::chrono::milliseconds(20);
    }
    if (now >= next) {
      rig.ingest(rig.batch[i++ % rig.batch.size()]);
      ++count;
      next += gap;
      if (next + std::chrono::milliseconds(50) < now) next = now;  // don't chase a huge backlog
    } else {
      const auto wait = next - now;
      if (wait > std::chrono::microseconds(200)) {
        std::this_thread::sleep_for(wait - std::chrono::microseconds(100));
      }
    }
  }
  const double elapsed =
      std::chrono::duration<double>(util::now_steady() - start).count();
  out.achievedDescPerSec = static_cast<double>(count) / elapsed;
  out.probeLatencyP50Us = median(std::move(probeLatUs));
  return out;
}

std::vector<BenchRow> overhead_bench(const std::vector<double>& ratesMbps,
                                     const std::vector<BenchVariant>& variants,
                                     const BenchOptions& opts) {
  std::vector<BenchRow> rows;
  for (BenchVariant v : variants) {
    BenchRow sat;
    sat.variant = v;
    sat.achievedDescPerSec = saturating_rate(v, opts);
    rows.push_back(sat);
    for (double mbps : ratesMbps) {
      const double descPerSec = mbps * 1e6 / 8.0 / opts.descriptorBytes;
      PacedResult r = paced_rate(v, descPerSec, opts);
      BenchRow row;
      row.variant = v;
      row.offeredMbps = mbps;
      row.offeredDescPerSec = descPerSec;
      row.achievedDescPerSec = r.achievedDescPerSec;
      row.probeLatencyP50Us = r.probeLatencyP50Us;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "variant,offeredMbps,offeredDescPerSec,achievedDescPerSec,probeLatencyP50Us\n";
  for (const BenchRow& r : rows) {
    out << to_token(r.variant) << ',' << r.offeredMbps << ',' << r.offeredDescPerSec << ','
        << r.achievedDescPerSec << ',' << r.probeLatencyP50Us << '\n';
  }
}

}  // namespace cloop::harness
