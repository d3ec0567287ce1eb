#pragma once

#include <string>
#include <vector>

#include "cloop/harness/scenario.hpp"
#include "cloop/util/eventlog.hpp"

namespace cloop::harness {

struct BreakdownRow {
  int run = 0;
  int interval = 0;
  double t1 = -1, t2 = -1, t3 = -1;
  bool released = false;
  bool timedOut = false;
};

struct IntervalSummary {
  int interval = 0;
  int runs = 0;
  int completed = 0;  // runs with a full t1/t2/t3 breakdown
  double meanT1 = 0, sdT1 = 0;
  double meanT2 = 0, sdT2 = 0;
  double meanT3 = 0, sdT3 = 0;
};

std::vector<BreakdownRow> to_breakdown_rows(const std::vector<RunResult>& results);

/// Rebuilds breakdown rows from a cross-service event log (the run_end
/// records carry the measured values).
std::vector<BreakdownRow> breakdown_from_events(const std::vector<util::Event>& events);

std::vector<IntervalSummary> summarize(const std::vector<BreakdownRow>& rows);

void write_breakdown_csv(const std::string& path, const std::vector<BreakdownRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<IntervalSummary>& summaries);
std::string format_summary_table(const std::vector<IntervalSummary>& summaries);

}  // namespace cloop::harness
