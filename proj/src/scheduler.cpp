#include "pcs/scheduler.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pcs/error.hpp"
#include "pcs/kernels.hpp"

namespace pcs {

std::optional<MatrixCell> select_migration(const PerformanceMatrix& matrix,
                                           const std::vector<bool>& candidates) {
  const auto& k = kernels::active();
  double best = -std::numeric_limits<double>::infinity();
  for (ComponentId i = 0; i < matrix.rows(); ++i) {
    if (!candidates[i]) continue;
    const double row_best = k.row_max(matrix.row(i));
    best = row_best > best ? row_best : best;
  }
  if (!std::isfinite(best)) return std::nullopt;

  std::optional<MatrixCell> chosen;
  double chosen_self = -std::numeric_limits<double>::infinity();
  for (ComponentId i = 0; i < matrix.rows(); ++i) {
    if (!candidates[i]) continue;
    for (NodeId j = 0; j < matrix.cols(); ++j) {
      if (matrix.reduction(i, j) < best - kTieTolerance) continue;
      const double self = matrix.self_reduction(i, j);
      if (!chosen || self > chosen_self + kTieTolerance) {
        chosen = MatrixCell{i, j};
        chosen_self = self;
      }
    }
  }
  return chosen;
}

void update_matrix(PerformanceMatrix& matrix, const std::vector<bool>& candidates,
                   const MigrationEvaluator& evaluator, const ClusterState& state, NodeId origin,
                   NodeId destination) {
  for (ComponentId i = 0; i < matrix.rows(); ++i) {
    if (!candidates[i]) continue;
    const NodeId host = state.node_of(i);
    if (host == origin || host == destination) {
      evaluator.evaluate_row(i, matrix.row(i), matrix.self_row(i));
      continue;
    }
    for (NodeId j : {origin, destination}) {
      const CellValue v = evaluator.evaluate(i, j);
      matrix.reduction(i, j) = v.reduction;
      matrix.self_reduction(i, j) = v.self_reduction;
    }
  }
  matrix.set_baseline_overall(evaluator.baseline_overall());
}

ScheduleResult schedule(const PerformanceMatrix& initial, const ClusterState& initial_state,
                        const CombinedModel& model, double arrival_rate,
                        const SchedulerConfig& config, const StepObserver& observer) {
  const std::size_t m = initial_state.component_count();
  if (initial.rows() != m || initial.cols() != initial_state.node_count()) {
    throw Error(ErrorCode::kInconsistentMatrix,
                "matrix is " + std::to_string(initial.rows()) + "x" +
                    std::to_string(initial.cols()) + " but the cluster has " + std::to_string(m) +
                    " components on " + std::to_string(initial_state.node_count()) + " nodes");
  }
  if (!std::isfinite(config.epsilon) || config.epsilon < 0.0) {
    throw Error(ErrorCode::kValidationError, "migration threshold must be >= 0");
  }

  ClusterState state = initial_state;
  PerformanceMatrix matrix = initial;
  MigrationEvaluator evaluator(state, model, arrival_rate);

  ScheduleResult result;
  result.baseline_overall = evaluator.baseline_overall();
  std::vector<bool> candidates(m, true);
  std::size_t remaining = m;
  const std::size_t limit = config.max_iterations.value_or(m);

  while (remaining > 0 && result.plan.migrations.size() < limit) {
    const auto cell = select_migration(matrix, candidates);
    if (!cell) break;
    const auto [i, j] = *cell;

    // Cells outside the refreshed rows/columns may be stale; re-predict the
    // winner before acting on it and reselect if it moved.
    const CellValue fresh = evaluator.evaluate(i, j);
    if (fresh.reduction != matrix.reduction(i, j) ||
        fresh.self_reduction != matrix.self_reduction(i, j)) {
      matrix.reduction(i, j) = fresh.reduction;
      matrix.self_reduction(i, j) = fresh.self_reduction;
      ++result.revalidations;
      continue;
    }
    if (!(fresh.reduction > config.epsilon)) break;

    const NodeId origin = state.node_of(i);
    const Migration mig{i, origin, j, fresh.reduction};
    state.apply_migration(i, j);
    candidates[i] = false;
    --remaining;
    const std::array<NodeId, 2> touched{origin, j};
    evaluator.refresh_nodes(touched);
    update_matrix(matrix, candidates, evaluator, state, origin, j);
    result.plan.migrations.push_back(mig);

    if (observer) {
      observer(ScheduleStep{result.plan.migrations.size() - 1, &result.plan.migrations.back(),
                            &matrix, &state, &candidates});
    }
  }

  result.plan.assignments = state.topology().placement();
  result.final_overall = evaluator.baseline_overall();
  return result;
}

ScheduleResult schedule(const ClusterState& state, const CombinedModel& model,
                        double arrival_rate, const SchedulerConfig& config,
                        const StepObserver& observer) {
  return schedule(build_matrix(state, model, arrival_rate), state, model, arrival_rate, config,
                  observer);
}

BruteForceResult brute_force_allocate(const ClusterState& state, const CombinedModel& model,
                                      double arrival_rate) {
  const std::size_t m = state.component_count();
  const std::size_t k = state.node_count();
  const double count = std::pow(static_cast<double>(k), static_cast<double>(m));
  if (count > kBruteForceLimit) {
    throw Error(ErrorCode::kTooLarge, std::to_string(k) + "^" + std::to_string(m) +
                                          " placements exceed the exhaustive-search guard");
  }

  const std::vector<NodeState> original = state.node_states();
  std::vector<ContentionVector> contribution(m);
  for (ComponentId c = 0; c < m; ++c) contribution[c] = state.contribution(c);

  std::vector<NodeId> placement(m, 0);
  BruteForceResult best{{}, Latency::saturated()};
  bool have_best = false;
  while (true) {
    std::vector<NodeState> nodes(k);
    for (NodeId n = 0; n < k; ++n) {
      nodes[n].id = n;
      nodes[n].batch_samples = original[n].batch_samples;
    }
    for (ComponentId c = 0; c < m; ++c) {
      nodes[placement[c]].per_component_contribution[c] = contribution[c];
    }
    const ClusterState candidate(ServiceTopology(state.topology().stages(), placement),
                                 std::move(nodes));
    const Latency overall = predict_placement_overall(candidate, model, arrival_rate);
    if (!have_best || overall < best.optimal_overall) {
      best = {placement, overall};
      have_best = true;
    }

    // Next placement, last component varying fastest.
    std::size_t pos = m;
    while (pos > 0) {
      --pos;
      if (++placement[pos] < k) break;
      placement[pos] = 0;
      if (pos == 0) return best;
    }
    if (m == 0) return best;
  }
}

std::string format_migration_log(std::size_t interval, const Migration& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu\t%zu\t%zu\t%zu\t%.6f", interval, m.component, m.origin,
                m.destination, m.predicted_reduction * 1e3);
  return buf;
}

}  // namespace pcs
