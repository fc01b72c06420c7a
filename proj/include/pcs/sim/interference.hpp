#pragma once

// Batch-job interference: a seeded per-node Poisson stream of jobs whose
// contention footprint scales with a sampled input size.

#include <cstdint>
#include <string>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/queueing.hpp"

namespace pcs::sim {

struct BatchJobSpec {
  std::string workload_class;
  double start = 0.0;     // seconds
  double duration = 0.0;  // seconds, > 0
  ContentionVector contention_footprint;
  NodeId node = 0;
  double input_size_gb = 0.0;

  bool operator==(const BatchJobSpec&) const = default;
};

// Fraction of footprint_at_full a job of the given input size applies.
struct SizePoint {
  double size_gb = 0.0;
  double intensity = 0.0;

  bool operator==(const SizePoint&) const = default;
};

enum class SizeSampling { kTable, kLogUniform };

struct WorkloadClass {
  std::string name;
  double rate = 0.0;  // jobs per second per node, before node scaling
  double min_duration = 5.0;
  double max_duration = 300.0;
  ContentionVector footprint_at_full;
  std::vector<SizePoint> size_table;  // ascending size
  SizeSampling sampling = SizeSampling::kTable;

  bool operator==(const WorkloadClass&) const = default;
};

struct JobMix {
  std::vector<WorkloadClass> classes;
  // Per-node multiplier on every class rate; empty means 1 everywhere.
  std::vector<double> node_rate_scale;

  bool operator==(const JobMix&) const = default;
};

// Intensity for an input size: piecewise-linear in log(size) between table
// points, held constant beyond the ends.
double intensity_for_size(const WorkloadClass& cls, double size_gb);

// cpu_heavy / io_heavy / mixed classes with the measured core-usage points
// {0.5 GB: 0.31, 2 GB: 0.61, 8 GB: 0.79} for the CPU-bound class.
JobMix default_job_mix();

// Jobs sorted by (start, node, class order). Throws kBadConfig for a
// non-positive horizon or a malformed class.
std::vector<BatchJobSpec> generate_interference_trace(std::size_t node_count, const JobMix& mix,
                                                      double horizon, std::uint64_t seed);

}  // namespace pcs::sim
