#pragma once

#include <string>
#include <vector>

namespace cloop::harness {

enum class BenchVariant { BaselineNoEes, Ees0Sub, Ees1Sub };

const char* to_token(BenchVariant v);

struct BenchRow {
  BenchVariant variant = BenchVariant::BaselineNoEes;
  double offeredMbps = 0;          // 0 = saturating
  double offeredDescPerSec = 0;    // 0 = saturating
  double achievedDescPerSec = 0;
  double probeLatencyP50Us = 0;
};

struct BenchOptions {
  double secondsPerTrial = 0.6;
  int trials = 5;
  uint32_t descriptorBytes = 1250;
  int flows = 64;
};

/// Ingest benchmark over the in-process data path. The BASELINE variant
/// runs the forwarding path with the aggregation hook compiled out; EES
/// variants run the full path with zero / one active subscription (per-flow
/// volume reports every 3 seconds). Probe latency is sampled concurrently.
std::vector<BenchRow> overhead_bench(const std::vector<double>& ratesMbps,
                                     const std::vector<BenchVariant>& variants,
                                     const BenchOptions& opts = {});

/// Median saturating descriptor rate for one variant (descriptors/second).
double saturating_rate(BenchVariant variant, const BenchOptions& opts = {});

/// Saturating rates for two variants with interleaved trials, so slow drift
/// in machine load hits both sides alike. Returns {rateA, rateB}.
std::pair<double, double> saturating_rates_interleaved(BenchVariant a, BenchVariant b,
                                                       const BenchOptions& opts = {});

struct PacedResult {
  double achievedDescPerSec = 0;
  double probeLatencyP50Us = 0;
};
PacedResult paced_rate(BenchVariant variant, double descPerSec, const BenchOptions& opts = {});

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

}  // namespace cloop::harness
