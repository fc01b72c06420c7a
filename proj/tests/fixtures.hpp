#pragma once

// Shared fixtures for the matrix and scheduler tests: small worked clusters,
// a seeded random cluster generator and a from-scratch oracle that shares no
// code with the incremental evaluator beyond the model and M/G/1 formula.

#include <random>
#include <vector>

#include "pcs/model.hpp"
#include "pcs/perf_matrix.hpp"
#include "pcs/queueing.hpp"

namespace fixtures {

// Plain description of a cluster, independent of ClusterState.
struct ClusterSpec {
  std::vector<std::vector<pcs::ComponentId>> stages;
  std::vector<pcs::NodeId> placement;
  std::vector<std::vector<pcs::ContentionVector>> batch;  // per node, one window
  std::vector<pcs::ContentionVector> contribution;        // per component
};

pcs::ClusterState make_state(const ClusterSpec& layout);

// Service time 10 ms + 0.1 s per unit of core usage, other resources ignored.
pcs::CombinedModel core_only_model();

// Four components in stages {c0}, {c1, c2}, {c3} on four nodes. Moving c1 to
// n3 takes the overall latency from 57 ms to 39 ms at zero load.
ClusterSpec hotspot_cluster();

// Four components on four nodes where c1 has two equally good destinations
// (n0 and n3, 10 ms each) that differ in c1's own reduction (20 vs 30 ms).
ClusterSpec tie_cluster();

struct RandomCluster {
  ClusterSpec layout;
  pcs::CombinedModel model;
  double arrival_rate;
};

// Random topology with m components over `stage_count` stages, k nodes and a
// window of t samples; stage_count is capped at m. `load` scales the arrival rate (0 = idle queues).
RandomCluster random_cluster(std::mt19937_64& rng, std::size_t m, std::size_t k,
                             std::size_t stage_count, std::size_t t, double load);

// Overall latency of a placement computed directly from the description.
pcs::Latency oracle_overall(const ClusterSpec& layout, const std::vector<pcs::NodeId>& placement,
                            const pcs::CombinedModel& model, double arrival_rate);

// Component latencies for a placement, same derivation.
std::vector<pcs::Latency> oracle_latencies(const ClusterSpec& layout,
                                           const std::vector<pcs::NodeId>& placement,
                                           const pcs::CombinedModel& model, double arrival_rate);

// Matrix cell for moving component i to node j, re-derived from scratch.
pcs::CellValue oracle_cell(const ClusterSpec& layout, const std::vector<pcs::NodeId>& placement,
                           const pcs::CombinedModel& model, double arrival_rate,
                           pcs::ComponentId i, pcs::NodeId j);

// Current placement of a state, as a layout (for handing back to the oracle).
ClusterSpec layout_of(const pcs::ClusterState& state);

// Exact equality of reductions, or both -inf / both within tol.
bool close(double a, double b, double tol);

}  // namespace fixtures
