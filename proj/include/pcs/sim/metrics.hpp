#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcs/sim/engine.hpp"

namespace pcs::sim {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
// Throws kEmptyTrace on an empty sample.
double nearest_rank_percentile(std::span<const double> values, double p);

struct MetricsReport {
  std::vector<double> component_p99;  // seconds; NaN for components never measured
  double max_p99 = 0.0;
  double mean_p99 = 0.0;
  double mean_overall = 0.0;  // seconds, completed measured requests
  std::size_t completed = 0;
  std::size_t migrations = 0;
  bool saturated = false;
  double max_utilization = 0.0;  // busiest component's busy fraction of the simulated span
};

// Throws kEmptyTrace when no measured request completed.
MetricsReport compute_metrics(const SimulationTrace& trace);

}  // namespace pcs::sim
