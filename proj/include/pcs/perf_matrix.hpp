#pragma once

// Performance matrix: predicted change in overall service latency for every
// single component -> node migration.
//
// Contention bookkeeping follows the migration update rules:
//   migrating component c_i        U' = U_nj   (everything running on n_j)
//   components on c_i's origin     U' = U - U_ci  (clamped at 0)
//   components on the destination  U' = U + U_ci
//   everyone else                  U' = U
// A component's contention U is what its co-runners impose on it: the node's
// batch load plus the contributions of the *other* components on that node.
// With that reading the four rules are exact, and a state updated by them
// equals the state re-derived from the new placement.

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/model.hpp"
#include "pcs/queueing.hpp"

namespace pcs {

struct NodeState {
  NodeId id = 0;
  // Monitored window of contention from co-located batch jobs, one entry per
  // sampling instant. All nodes of a cluster share the window length.
  std::vector<ContentionVector> batch_samples;
  // U_ci of each service component hosted here.
  std::map<ComponentId, ContentionVector> per_component_contribution;

  // Mean of batch_samples.
  ContentionVector batch_contribution() const;
  // batch_contribution() plus every hosted component's contribution.
  ContentionVector aggregate_contention() const;

  bool operator==(const NodeState&) const = default;
};

enum class MigrationRole { kMigrating, kOnOrigin, kOnDestination, kOther };

ContentionVector updated_contention(MigrationRole role, const ContentionVector& u,
                                    const ContentionVector& u_ci, const ContentionVector& u_nj);

// Placement plus contention windows for every component and node.
class ClusterState {
 public:
  // nodes[j].id must equal j; each component must be listed in exactly the
  // node its placement names. Throws kInvalidTopology otherwise and
  // kEmptySamples for empty or ragged windows.
  ClusterState(ServiceTopology topology, std::vector<NodeState> nodes);

  const ServiceTopology& topology() const { return topology_; }
  std::size_t component_count() const { return topology_.component_count(); }
  std::size_t node_count() const { return batch_.size(); }
  std::size_t window_size() const { return window_; }

  NodeId node_of(ComponentId c) const { return topology_.node_of(c); }
  const ContentionVector& contribution(ComponentId c) const { return contribution_[c]; }
  // Ascending component ids.
  const std::vector<ComponentId>& residents(NodeId n) const { return residents_[n]; }

  // U for component c over the window.
  const SampleWindow& component_samples(ComponentId c) const { return component_samples_[c]; }
  // U_nj over the window: batch plus every resident's contribution.
  const SampleWindow& node_aggregate(NodeId n) const { return node_aggregate_[n]; }
  const SampleWindow& batch_window(NodeId n) const { return batch_[n]; }

  // Moves c to destination, updating every affected window with the
  // migration rules rather than re-deriving them.
  void apply_migration(ComponentId c, NodeId destination);

  std::vector<NodeState> node_states() const;

 private:
  void derive();

  ServiceTopology topology_;
  std::vector<SampleWindow> batch_;
  std::vector<ContentionVector> contribution_;
  std::vector<std::vector<ComponentId>> residents_;
  std::vector<SampleWindow> component_samples_;
  std::vector<SampleWindow> node_aggregate_;
  std::size_t window_ = 0;
};

// m x k reductions (seconds, possibly negative or -inf) together with the
// migrated component's own latency reduction for each cell.
class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  PerformanceMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double reduction(ComponentId i, NodeId j) const { return reduction_[i * cols_ + j]; }
  double& reduction(ComponentId i, NodeId j) { return reduction_[i * cols_ + j]; }
  double self_reduction(ComponentId i, NodeId j) const { return self_[i * cols_ + j]; }
  double& self_reduction(ComponentId i, NodeId j) { return self_[i * cols_ + j]; }

  std::span<const double> row(ComponentId i) const {
    return {reduction_.data() + i * cols_, cols_};
  }
  std::span<double> row(ComponentId i) { return {reduction_.data() + i * cols_, cols_}; }
  std::span<double> self_row(ComponentId i) { return {self_.data() + i * cols_, cols_}; }

  Latency baseline_overall() const { return baseline_; }
  void set_baseline_overall(Latency l) { baseline_ = l; }

  bool operator==(const PerformanceMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> reduction_;
  std::vector<double> self_;
  Latency baseline_ = Latency::seconds(0.0);
};

// When the current placement is already predicted saturated, an ordinary
// difference is undefined. A migration that brings every stage back below
// capacity is then scored kSaturationCredit minus its resulting latency, so
// such moves rank above all others and among themselves by outcome; moves
// that leave the service saturated score -inf.
inline constexpr double kSaturationCredit = 1.0e6;

struct CellValue {
  double reduction = 0.0;       // l_overall - l'_overall
  double self_reduction = 0.0;  // l_i - l'_i
};

// Caches every component's predicted latency for the current state of a
// ClusterState and evaluates hypothetical single migrations against it.
// Only the mover and the residents of the origin and destination nodes are
// re-predicted per cell; other components reuse the cache.
class MigrationEvaluator {
 public:
  // Holds references: state and model must outlive the evaluator.
  MigrationEvaluator(const ClusterState& state, const CombinedModel& model, double arrival_rate);

  // Re-predicts the residents of the given nodes after the state changed.
  void refresh_nodes(std::span<const NodeId> nodes);
  void refresh_all();

  Latency baseline_overall() const;
  Latency component_latency(ComponentId c) const { return latency_[c]; }
  const ServiceTimeStats& component_stats(ComponentId c) const { return stats_[c]; }

  CellValue evaluate(ComponentId i, NodeId j) const;
  // One full row; both spans must have node_count() entries.
  void evaluate_row(ComponentId i, std::span<double> reduction, std::span<double> self) const;

  // Every component's latency as if c_i were moved to n_j.
  std::vector<Latency> hypothetical_latencies(ComponentId i, NodeId j) const;

 private:
  struct Change {
    ComponentId component;
    Latency latency;
  };

  Latency predict_latency(const SampleWindow& window, const ContentionVector& shift) const;
  void origin_changes(ComponentId i, std::vector<Change>& out) const;
  CellValue evaluate_with(ComponentId i, NodeId j, std::span<const Change> origin,
                          std::vector<Change>& scratch) const;
  void rebuild_stages();

  const ClusterState* state_;
  const CombinedModel* model_;
  double lambda_;
  std::vector<ServiceTimeStats> stats_;
  std::vector<Latency> latency_;
  std::vector<Latency> stage_latency_;
  std::vector<std::vector<ComponentId>> stage_order_;  // members by latency, descending
  std::size_t saturated_stages_ = 0;
  double finite_sum_ = 0.0;
};

PerformanceMatrix build_matrix(const ClusterState& state, const CombinedModel& model,
                               double arrival_rate);

double component_self_reduction(const ClusterState& state, const CombinedModel& model,
                                double arrival_rate, ComponentId i, NodeId j);

// Overall latency of the state's current placement, predicted without any
// caching: windows are re-derived from the placement, then stats, M/G/1,
// stage max and sum are applied in turn.
Latency predict_placement_overall(const ClusterState& state, const CombinedModel& model,
                                  double arrival_rate);

// component_id,node_id,reduction_ms,self_reduction_ms
void write_matrix_csv(std::ostream& out, const PerformanceMatrix& matrix);

}  // namespace pcs
