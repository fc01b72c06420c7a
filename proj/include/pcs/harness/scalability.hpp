#pragma once

// Wall time of one scheduling round over a grid of cluster sizes.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pcs/model.hpp"
#include "pcs/perf_matrix.hpp"

namespace pcs::harness {

struct SyntheticCluster {
  ClusterState state;
  CombinedModel model;
  double arrival_rate = 0.0;
};

// m components in three stages (1, m-2, 1; a single stage when m < 3) packed
// onto the hotter half of k nodes, so a scheduling round has work to do.
// window is the number of contention samples per node.
SyntheticCluster synthetic_cluster(std::size_t m, std::size_t k, std::uint64_t seed,
                                   std::size_t window = 60);

struct ScalabilityPoint {
  std::size_t m = 0;
  std::size_t k = 0;
  double seconds = 0.0;  // best of the repetitions, matrix build included
  std::size_t migrations = 0;
};

struct ScalabilityReport {
  std::vector<ScalabilityPoint> points;
  // Least-squares slope of log(seconds) on log(m), one per k that has at
  // least two m values; NaN otherwise.
  std::vector<double> exponent_by_k;
};

struct ScalabilityOptions {
  std::uint64_t seed = 1;
  std::size_t repetitions = 3;
  double epsilon = 0.0;  // seconds; 0 lets every strict improvement through
  std::size_t window = 60;
};

ScalabilityReport scalability_report(const std::vector<std::size_t>& ms,
                                     const std::vector<std::size_t>& ks,
                                     const ScalabilityOptions& options = {});

// Slope of the least-squares line through (log x, log y).
double fit_log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_scalability_table(std::ostream& out, const ScalabilityReport& report,
                             const std::vector<std::size_t>& ks);

}  // namespace pcs::harness
