#include "pcs/perf_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "pcs/error.hpp"

namespace pcs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ContentionVector negated(const ContentionVector& v) {
  return {-v.core_usage, -v.cache_mpki, -v.disk_bw, -v.network_bw};
}

// Same arithmetic as ContentionVector's clamped subtraction, applied to a window.
void subtract_clamped(SampleWindow& w, const ContentionVector& v) {
  for (std::size_t t = 0; t < w.size(); ++t) {
    const ContentionVector u = w.at(t) - v;
    w.core[t] = u.core_usage;
    w.cache[t] = u.cache_mpki;
    w.disk[t] = u.disk_bw;
    w.network[t] = u.network_bw;
  }
}

void add(SampleWindow& w, const ContentionVector& v) {
  for (std::size_t t = 0; t < w.size(); ++t) {
    w.core[t] += v.core_usage;
    w.cache[t] += v.cache_mpki;
    w.disk[t] += v.disk_bw;
    w.network[t] += v.network_bw;
  }
}

}  // namespace

ContentionVector NodeState::batch_contribution() const {
  return batch_samples.empty() ? ContentionVector{} : mean_of(batch_samples);
}

ContentionVector NodeState::aggregate_contention() const {
  ContentionVector out = batch_contribution();
  for (const auto& [c, u] : per_component_contribution) out += u;
  return out;
}

ContentionVector updated_contention(MigrationRole role, const ContentionVector& u,
                                    const ContentionVector& u_ci, const ContentionVector& u_nj) {
  switch (role) {
    case MigrationRole::kMigrating: return u_nj;
    case MigrationRole::kOnOrigin: return u - u_ci;
    case MigrationRole::kOnDestination: return u + u_ci;
    case MigrationRole::kOther: break;
  }
  return u;
}

// ---------------------------------------------------------------------------
// ClusterState

ClusterState::ClusterState(ServiceTopology topology, std::vector<NodeState> nodes)
    : topology_(std::move(topology)) {
  const std::size_t m = topology_.component_count();
  const std::size_t k = nodes.size();
  if (k == 0) throw Error(ErrorCode::kInvalidTopology, "cluster has no nodes");
  window_ = nodes.front().batch_samples.size();
  if (window_ == 0) throw Error(ErrorCode::kEmptySamples, "node 0 has an empty batch window");

  contribution_.assign(m, ContentionVector{});
  std::vector<bool> listed(m, false);
  batch_.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const NodeState& node = nodes[j];
    if (node.id != j) {
      throw Error(ErrorCode::kInvalidTopology,
                  "node at position " + std::to_string(j) + " has id " + std::to_string(node.id));
    }
    if (node.batch_samples.size() != window_) {
      throw Error(ErrorCode::kEmptySamples,
                  "node " + std::to_string(j) + " window length differs from node 0");
    }
    for (const auto& s : node.batch_samples) {
      if (!s.valid()) {
        throw Error(ErrorCode::kValidationError,
                    "node " + std::to_string(j) + " has a negative or non-finite sample");
      }
    }
    batch_.emplace_back(node.batch_samples);
    for (const auto& [c, u] : node.per_component_contribution) {
      if (c >= m || topology_.node_of(c) != j || listed[c]) {
        throw Error(ErrorCode::kInvalidTopology, "component " + std::to_string(c) +
                                                     " listed on node " + std::to_string(j) +
                                                     " contradicts the placement");
      }
      if (!u.valid()) {
        throw Error(ErrorCode::kValidationError,
                    "component " + std::to_string(c) + " has an invalid contribution");
      }
      listed[c] = true;
      contribution_[c] = u;
    }
  }
  for (ComponentId c = 0; c < m; ++c) {
    if (!listed[c]) {
      throw Error(ErrorCode::kInvalidTopology, "component " + std::to_string(c) +
                                                   " is not listed on its node " +
                                                   std::to_string(topology_.node_of(c)));
    }
  }
  derive();
}

void ClusterState::derive() {
  const std::size_t m = component_count();
  const std::size_t k = node_count();
  residents_.assign(k, {});
  for (ComponentId c = 0; c < m; ++c) residents_[node_of(c)].push_back(c);

  node_aggregate_.assign(k, SampleWindow{});
  component_samples_.assign(m, SampleWindow{});
  for (NodeId n = 0; n < k; ++n) {
    SampleWindow agg = batch_[n];
    for (ComponentId r : residents_[n]) add(agg, contribution_[r]);
    node_aggregate_[n] = std::move(agg);
    for (ComponentId c : residents_[n]) {
      SampleWindow w = batch_[n];
      for (ComponentId r : residents_[n]) {
        if (r != c) add(w, contribution_[r]);
      }
      component_samples_[c] = std::move(w);
    }
  }
}

void ClusterState::apply_migration(ComponentId c, NodeId destination) {
  const NodeId origin = node_of(c);
  if (destination >= node_count()) {
    throw Error(ErrorCode::kInvalidTopology, "destination node " + std::to_string(destination) +
                                                 " does not exist");
  }
  if (destination == origin) return;
  const ContentionVector& u_ci = contribution_[c];

  for (ComponentId r : residents_[origin]) {
    if (r != c) subtract_clamped(component_samples_[r], u_ci);
  }
  for (ComponentId r : residents_[destination]) add(component_samples_[r], u_ci);
  component_samples_[c] = node_aggregate_[destination];
  subtract_clamped(node_aggregate_[origin], u_ci);
  add(node_aggregate_[destination], u_ci);

  auto& from = residents_[origin];
  from.erase(std::find(from.begin(), from.end(), c));
  auto& to = residents_[destination];
  to.insert(std::upper_bound(to.begin(), to.end(), c), c);
  topology_.move(c, destination);
}

std::vector<NodeState> ClusterState::node_states() const {
  std::vector<NodeState> out(node_count());
  for (NodeId n = 0; n < node_count(); ++n) {
    out[n].id = n;
    out[n].batch_samples = batch_[n].to_vectors();
    for (ComponentId c : residents_[n]) out[n].per_component_contribution[c] = contribution_[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// PerformanceMatrix

PerformanceMatrix::PerformanceMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), reduction_(rows * cols, 0.0), self_(rows * cols, 0.0) {}

// ---------------------------------------------------------------------------
// MigrationEvaluator

MigrationEvaluator::MigrationEvaluator(const ClusterState& state, const CombinedModel& model,
                                       double arrival_rate)
    : state_(&state), model_(&model), lambda_(arrival_rate) {
  if (!std::isfinite(arrival_rate) || arrival_rate < 0.0) {
    throw Error(ErrorCode::kInvalidLoad, "arrival rate must be finite and non-negative");
  }
  refresh_all();
}

Latency MigrationEvaluator::predict_latency(const SampleWindow& window,
                                            const ContentionVector& shift) const {
  const ServiceTimeStats st = service_time_stats(*model_, window, shift);
  return mg1_latency({lambda_, st.mean, st.variance});
}

void MigrationEvaluator::refresh_all() {
  const std::size_t m = state_->component_count();
  stats_.assign(m, {});
  latency_.assign(m, Latency::seconds(0.0));
  for (ComponentId c = 0; c < m; ++c) {
    stats_[c] = service_time_stats(*model_, state_->component_samples(c));
    latency_[c] = mg1_latency({lambda_, stats_[c].mean, stats_[c].variance});
  }
  rebuild_stages();
}

void MigrationEvaluator::refresh_nodes(std::span<const NodeId> nodes) {
  for (NodeId n : nodes) {
    for (ComponentId c : state_->residents(n)) {
      stats_[c] = service_time_stats(*model_, state_->component_samples(c));
      latency_[c] = mg1_latency({lambda_, stats_[c].mean, stats_[c].variance});
    }
  }
  rebuild_stages();
}

void MigrationEvaluator::rebuild_stages() {
  const auto& stages = state_->topology().stages();
  stage_latency_.assign(stages.size(), Latency::seconds(0.0));
  stage_order_.assign(stages.size(), {});
  saturated_stages_ = 0;
  finite_sum_ = 0.0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    auto& order = stage_order_[s];
    order = stages[s];
    std::stable_sort(order.begin(), order.end(),
                     [&](ComponentId a, ComponentId b) { return latency_[b] < latency_[a]; });
    stage_latency_[s] = latency_[order.front()];
    if (stage_latency_[s].is_saturated()) {
      ++saturated_stages_;
    } else {
      finite_sum_ = finite_sum_ + stage_latency_[s].value();
    }
  }
}

Latency MigrationEvaluator::baseline_overall() const {
  return saturated_stages_ > 0 ? Latency::saturated() : Latency::seconds(finite_sum_);
}

void MigrationEvaluator::origin_changes(ComponentId i, std::vector<Change>& out) const {
  out.clear();
  const ContentionVector minus = negated(state_->contribution(i));
  for (ComponentId r : state_->residents(state_->node_of(i))) {
    if (r != i) out.push_back({r, predict_latency(state_->component_samples(r), minus)});
  }
}

CellValue MigrationEvaluator::evaluate_with(ComponentId i, NodeId j,
                                            std::span<const Change> origin,
                                            std::vector<Change>& changes) const {
  if (j == state_->node_of(i)) return {0.0, 0.0};

  changes.assign(origin.begin(), origin.end());
  const Latency mover = predict_latency(state_->node_aggregate(j), ContentionVector{});
  changes.push_back({i, mover});
  const ContentionVector& u_ci = state_->contribution(i);
  for (ComponentId r : state_->residents(j)) {
    changes.push_back({r, predict_latency(state_->component_samples(r), u_ci)});
  }

  const auto& topo = state_->topology();
  auto changed = [&](ComponentId c) {
    return std::any_of(changes.begin(), changes.end(),
                       [c](const Change& ch) { return ch.component == c; });
  };

  // Affected stages in ascending order.
  std::size_t affected[64];
  std::vector<std::size_t> affected_heap;
  std::size_t* stages_begin = affected;
  std::size_t count = 0;
  if (changes.size() > 64) {
    affected_heap.resize(changes.size());
    stages_begin = affected_heap.data();
  }
  for (const auto& ch : changes) stages_begin[count++] = topo.stage_of(ch.component);
  std::sort(stages_begin, stages_begin + count);
  count = static_cast<std::size_t>(std::unique(stages_begin, stages_begin + count) - stages_begin);

  bool new_saturated = false;
  std::size_t saturated_cleared = 0;
  double delta = 0.0;      // sum of (old - new) over affected finite stages
  double new_finite = 0.0;  // sum of new stage latencies over affected stages
  double old_finite = 0.0;
  for (std::size_t a = 0; a < count; ++a) {
    const std::size_t s = stages_begin[a];
    Latency stage_new = Latency::seconds(-std::numeric_limits<double>::infinity());
    for (const auto& ch : changes) {
      if (topo.stage_of(ch.component) == s && stage_new < ch.latency) stage_new = ch.latency;
    }
    for (ComponentId c : stage_order_[s]) {
      if (!changed(c)) {
        if (stage_new < latency_[c]) stage_new = latency_[c];
        break;
      }
    }
    const Latency stage_old = stage_latency_[s];
    if (stage_new.is_saturated()) {
      new_saturated = true;
      continue;
    }
    new_finite += stage_new.value();
    if (stage_old.is_saturated()) {
      ++saturated_cleared;
    } else {
      old_finite += stage_old.value();
      delta += stage_old.value() - stage_new.value();
    }
  }

  CellValue out;
  if (new_saturated) {
    out.reduction = kNegInf;
  } else if (saturated_stages_ > 0) {
    out.reduction = saturated_cleared == saturated_stages_
                        ? kSaturationCredit - (finite_sum_ - old_finite + new_finite)
                        : kNegInf;
  } else {
    out.reduction = delta;
  }

  const Latency before = latency_[i];
  if (mover.is_saturated()) {
    out.self_reduction = kNegInf;
  } else if (before.is_saturated()) {
    out.self_reduction = kSaturationCredit - mover.value();
  } else {
    out.self_reduction = before.value() - mover.value();
  }
  return out;
}

CellValue MigrationEvaluator::evaluate(ComponentId i, NodeId j) const {
  std::vector<Change> origin;
  std::vector<Change> scratch;
  origin_changes(i, origin);
  return evaluate_with(i, j, origin, scratch);
}

void MigrationEvaluator::evaluate_row(ComponentId i, std::span<double> reduction,
                                      std::span<double> self) const {
  std::vector<Change> origin;
  std::vector<Change> scratch;
  origin_changes(i, origin);
  for (NodeId j = 0; j < state_->node_count(); ++j) {
    const CellValue v = evaluate_with(i, j, origin, scratch);
    reduction[j] = v.reduction;
    self[j] = v.self_reduction;
  }
}

std::vector<Latency> MigrationEvaluator::hypothetical_latencies(ComponentId i, NodeId j) const {
  std::vector<Latency> out = latency_;
  if (j == state_->node_of(i)) return out;
  const ContentionVector minus = negated(state_->contribution(i));
  for (ComponentId r : state_->residents(state_->node_of(i))) {
    if (r != i) out[r] = predict_latency(state_->component_samples(r), minus);
  }
  for (ComponentId r : state_->residents(j)) {
    out[r] = predict_latency(state_->component_samples(r), state_->contribution(i));
  }
  out[i] = predict_latency(state_->node_aggregate(j), ContentionVector{});
  return out;
}

// ---------------------------------------------------------------------------

PerformanceMatrix build_matrix(const ClusterState& state, const CombinedModel& model,
                               double arrival_rate) {
  const MigrationEvaluator eval(state, model, arrival_rate);
  PerformanceMatrix matrix(state.component_count(), state.node_count());
  for (ComponentId i = 0; i < state.component_count(); ++i) {
    eval.evaluate_row(i, matrix.row(i), matrix.self_row(i));
  }
  matrix.set_baseline_overall(eval.baseline_overall());
  return matrix;
}

double component_self_reduction(const ClusterState& state, const CombinedModel& model,
                                double arrival_rate, ComponentId i, NodeId j) {
  const MigrationEvaluator eval(state, model, arrival_rate);
  return eval.evaluate(i, j).self_reduction;
}

Latency predict_placement_overall(const ClusterState& state, const CombinedModel& model,
                                  double arrival_rate) {
  const ClusterState fresh(state.topology(), state.node_states());
  std::map<ComponentId, ComponentLoad> loads;
  for (ComponentId c = 0; c < fresh.component_count(); ++c) {
    const ServiceTimeStats st = service_time_stats(model, fresh.component_samples(c));
    loads[c] = {arrival_rate, st.mean, st.variance};
  }
  return predict_overall(fresh.topology(), loads);
}

void write_matrix_csv(std::ostream& out, const PerformanceMatrix& matrix) {
  out << "component_id,node_id,reduction_ms,self_reduction_ms\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(6);
  for (ComponentId i = 0; i < matrix.rows(); ++i) {
    for (NodeId j = 0; j < matrix.cols(); ++j) {
      out << i << ',' << j << ',' << matrix.reduction(i, j) * 1e3 << ','
          << matrix.self_reduction(i, j) * 1e3 << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace pcs
