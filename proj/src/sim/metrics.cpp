#include "pcs/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcs/error.hpp"

namespace pcs::sim {

double nearest_rank_percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::kEmptyTrace, "percentile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[rank - 1];
}

MetricsReport compute_metrics(const SimulationTrace& trace) {
  MetricsReport report;
  report.saturated = trace.saturated;
  report.migrations = trace.migrations.size();

  double total = 0.0;
  for (const auto& r : trace.requests) {
    if (r.completion_ns < 0) continue;
    if (static_cast<double>(r.arrival_ns) * 1e-9 < trace.warmup) continue;
    total += static_cast<double>(r.completion_ns - r.arrival_ns) * 1e-9;
    ++report.completed;
  }
  if (report.completed == 0) {
    throw Error(ErrorCode::kEmptyTrace, "no measured request completed");
  }
  report.mean_overall = total / static_cast<double>(report.completed);

  report.component_p99.assign(trace.component_latencies.size(),
                              std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t measured = 0;
  report.max_p99 = 0.0;
  for (std::size_t c = 0; c < trace.component_latencies.size(); ++c) {
    const auto& l = trace.component_latencies[c];
    if (l.empty()) continue;
    const double p = nearest_rank_percentile(l, 99.0);
    report.component_p99[c] = p;
    report.max_p99 = std::max(report.max_p99, p);
    sum += p;
    ++measured;
  }
  report.mean_p99 = measured > 0 ? sum / static_cast<double>(measured) : 0.0;
  // Queued work drains after the horizon, so the span runs to the last completion.
  double span = trace.horizon;
  for (const auto& r : trace.requests) {
    span = std::max(span, static_cast<double>(r.completion_ns) * 1e-9);
  }
  if (span > 0.0) {
    for (double busy : trace.busy_time) {
      report.max_utilization = std::max(report.max_utilization, busy / span);
    }
  }
  return report;
}

}  // namespace pcs::sim
