#include "cloop/harness/report.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace cloop::harness {

using nlohmann::json;

std::vector<BreakdownRow> to_breakdown_rows(const std::vector<RunResult>& results) {
  std::vector<BreakdownRow> rows;
  for (const RunResult& r : results) {
    rows.push_back(BreakdownRow{r.run, r.collectionPeriodSeconds, r.breakdown.t1, r.breakdown.t2,
                                r.breakdown.t3, r.released, r.timedOut});
  }
  return rows;
}

std::vector<BreakdownRow> breakdown_from_events(const std::vector<util::Event>& events) {
  std::vector<BreakdownRow> rows;
  for (const util::Event& e : events) {
    if (e.kind != "run_end") continue;
    json f = json::parse(e.fields, nullptr, false);
    if (f.is_discarded()) continue;
    BreakdownRow row;
    row.run = f.value("run", 0);
    row.interval = f.value("interval", 0);
    row.t1 = f.value("t1s", -1.0);
    row.t2 = f.value("t2s", -1.0);
    row.t3 = f.value("t3s", -1.0);
    row.released = f.value("released", false);
    row.timedOut = f.value("timedOut", false);
    rows.push_back(row);
  }
  return rows;
}

namespace {

void mean_sd(const std::vector<double>& xs, double* mean, double* sd) {
  *mean = 0;
  *sd = 0;
  if (xs.empty()) return;
  for (double x : xs) *mean += x;
  *mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double acc = 0;
  for (double x : xs) acc += (x - *mean) * (x - *mean);
  *sd = std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::vector<IntervalSummary> summarize(const std::vector<BreakdownRow>& rows) {
  std::map<int, std::vector<const BreakdownRow*>> byInterval;
  for (const BreakdownRow& r : rows) byInterval[r.interval].push_back(&r);
  std::vector<IntervalSummary> out;
  for (const auto& [interval, group] : byInterval) {
    IntervalSummary s;
    s.interval = interval;
    s.runs = static_cast<int>(group.size());
    std::vector<double> t1s, t2s, t3s;
    for (const BreakdownRow* r : group) {
      if (r->t1 >= 0 && r->t2 >= 0 && r->t3 >= 0) {
        ++s.completed;
        t1s.push_back(r->t1);
        t2s.push_back(r->t2);
        t3s.push_back(r->t3);
      }
    }
    mean_sd(t1s, &s.meanT1, &s.sdT1);
    mean_sd(t2s, &s.meanT2, &s.sdT2);
    mean_sd(t3s, &s.meanT3, &s.sdT3);
    out.push_back(s);
  }
  return out;
}

void write_breakdown_csv(const std::string& path, const std::vector<BreakdownRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run,interval,t1,t2,t3,released,timedOut\n";
  for (const BreakdownRow& r : rows) {
    out << r.run << ',' << r.interval << ',' << r.t1 << ',' << r.t2 << ',' << r.t3 << ','
        << (r.released ? 1 : 0) << ',' << (r.timedOut ? 1 : 0) << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::vector<IntervalSummary>& summaries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "interval,runs,completed,meanT1,sdT1,meanT2,sdT2,meanT3,sdT3\n";
  for (const IntervalSummary& s : summaries) {
    out << s.interval << ',' << s.runs << ',' << s.completed << ',' << s.meanT1 << ',' << s.sdT1
        << ',' << s.meanT2 << ',' << s.sdT2 << ',' << s.meanT3 << ',' << s.sdT3 << '\n';
  }
}

std::string format_summary_table(const std::vector<IntervalSummary>& summaries) {
  std::ostringstream out;
  out << "interval  runs  done  t1 mean±sd        t2 mean±sd        t3 mean±sd\n";
  char line[160];
  for (const IntervalSummary& s : summaries) {
    std::snprintf(line, sizeof(line),
                  "%7ds  %4d  %4d  %6.3f ± %5.3f s  %6.3f ± %5.3f s  %6.3f ± %5.3f s\n",
                  s.interval, s.runs, s.completed, s.meanT1, s.sdT1, s.meanT2, s.sdT2, s.meanT3,
                  s.sdT3);
    out << line;
  }
  return out.str();
}

}  // namespace cloop::harness
