#pragma once

// Greedy component-level scheduling over the performance matrix.
//
// Each iteration picks the largest predicted overall reduction among the
// remaining candidates (ties: largest reduction of the mover's own latency,
// then lowest component id, then lowest node id), commits it if it beats the
// migration threshold, drops the mover from the candidate set and refreshes
// the matrix cells the migration can have changed.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcs/model.hpp"
#include "pcs/perf_matrix.hpp"
#include "pcs/queueing.hpp"

namespace pcs {

struct SchedulerConfig {
  double epsilon = 0.005;  // seconds; 5% of a 100 ms latency target
  // Upper bound on committed migrations per interval; component count if unset.
  std::optional<std::size_t> max_iterations;

  bool operator==(const SchedulerConfig&) const = default;
};

struct Migration {
  ComponentId component = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  double predicted_reduction = 0.0;  // seconds, against the state just before

  bool operator==(const Migration&) const = default;
};

struct AllocationPlan {
  std::vector<NodeId> assignments;
  std::vector<Migration> migrations;
};

// Entries within this many seconds of the maximum count as tied.
inline constexpr double kTieTolerance = 1e-9;

struct MatrixCell {
  ComponentId component = 0;
  NodeId node = 0;
};

// Largest entry over candidate rows with the tie-break rules above. Entries
// equal to -inf never win. Empty when no candidate has a finite entry.
std::optional<MatrixCell> select_migration(const PerformanceMatrix& matrix,
                                           const std::vector<bool>& candidates);

// Refreshes the matrix after `origin -> destination` was committed: both
// columns for every candidate row, and every column of candidate rows hosted
// on either node. Rows of non-candidates are left as they were. The evaluator
// must already reflect the post-migration state.
void update_matrix(PerformanceMatrix& matrix, const std::vector<bool>& candidates,
                   const MigrationEvaluator& evaluator, const ClusterState& state,
                   NodeId origin, NodeId destination);

struct ScheduleStep {
  std::size_t index = 0;
  const Migration* migration = nullptr;
  const PerformanceMatrix* matrix = nullptr;  // after update_matrix
  const ClusterState* state = nullptr;        // after the migration
  const std::vector<bool>* candidates = nullptr;
};

using StepObserver = std::function<void(const ScheduleStep&)>;

struct ScheduleResult {
  AllocationPlan plan;
  Latency baseline_overall;
  Latency final_overall;      // as tracked incrementally
  std::size_t revalidations = 0;  // stale cells refreshed before a commit
};

// Throws kInconsistentMatrix when the matrix shape does not match the state.
ScheduleResult schedule(const PerformanceMatrix& matrix, const ClusterState& state,
                        const CombinedModel& model, double arrival_rate,
                        const SchedulerConfig& config, const StepObserver& observer = {});

// Builds the matrix first.
ScheduleResult schedule(const ClusterState& state, const CombinedModel& model,
                        double arrival_rate, const SchedulerConfig& config,
                        const StepObserver& observer = {});

struct BruteForceResult {
  std::vector<NodeId> assignments;
  Latency optimal_overall;
};

inline constexpr double kBruteForceLimit = 1e6;

// Exhaustive search over all k^m placements (first minimum in lexicographic
// placement order). Throws kTooLarge when k^m exceeds kBruteForceLimit.
BruteForceResult brute_force_allocate(const ClusterState& state, const CombinedModel& model,
                                      double arrival_rate);

// interval<TAB>component<TAB>origin<TAB>destination<TAB>reduction_ms
std::string format_migration_log(std::size_t interval, const Migration& m);

}  // namespace pcs
