#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fixtures {

using namespace pcs;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<ContentionVector> constant_window(double core, std::size_t t = 3) {
  return std::vector<ContentionVector>(t, ContentionVector{core, 0, 0, 0});
}

ContentionVector core(double c) { return {c, 0, 0, 0}; }

}  // namespace

ClusterState make_state(const ClusterSpec& layout) {
  std::vector<NodeState> nodes(layout.batch.size());
  for (NodeId n = 0; n < nodes.size(); ++n) {
    nodes[n].id = n;
    nodes[n].batch_samples = layout.batch[n];
  }
  for (ComponentId c = 0; c < layout.placement.size(); ++c) {
    nodes[layout.placement[c]].per_component_contribution[c] = layout.contribution[c];
  }
  return ClusterState(ServiceTopology(layout.stages, layout.placement), std::move(nodes));
}

CombinedModel core_only_model() {
  return CombinedModel({ResourceRegression{Resource::kCore, 0.010, 0.1, 1.0},
                        ResourceRegression{Resource::kCache, 0.0, 0.0, 0.0},
                        ResourceRegression{Resource::kDiskBw, 0.0, 0.0, 0.0},
                        ResourceRegression{Resource::kNetworkBw, 0.0, 0.0, 0.0}});
}

ClusterSpec hotspot_cluster() {
  ClusterSpec s;
  s.stages = {{0}, {1, 2}, {3}};
  s.placement = {0, 1, 2, 3};
  s.batch = {constant_window(0.0), constant_window(0.27), constant_window(0.05),
             constant_window(0.0)};
  s.contribution = {core(0.0), core(0.04), core(0.0), core(0.04)};
  return s;
}

ClusterSpec tie_cluster() {
  ClusterSpec s;
  s.stages = {{0}, {1, 2}, {3}};
  s.placement = {0, 1, 2, 3};
  s.batch = {constant_window(0.0), constant_window(0.4), constant_window(0.2),
             constant_window(0.0)};
  s.contribution = {core(0.2), core(0.1), core(0.3), core(0.1)};
  return s;
}

RandomCluster random_cluster(std::mt19937_64& rng, std::size_t m, std::size_t k,
                             std::size_t stage_count, std::size_t t, double load) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  stage_count = std::min(stage_count, m);
  ClusterSpec s;
  s.stages.assign(stage_count, {});
  for (ComponentId c = 0; c < m; ++c) {
    // The first stage_count components seed every stage so none is empty.
    s.stages[c < stage_count ? c : rng() % stage_count].push_back(c);
    s.placement.push_back(rng() % k);
    s.contribution.push_back(
        {unit(rng) * 0.15, unit(rng) * 3.0, unit(rng) * 2e6, unit(rng) * 1e6});
  }
  s.batch.assign(k, {});
  for (NodeId n = 0; n < k; ++n) {
    const double level = unit(rng);
    for (std::size_t i = 0; i < t; ++i) {
      s.batch[n].push_back({level * (0.3 + 0.4 * unit(rng)), level * unit(rng) * 20.0,
                            level * unit(rng) * 5e7, level * unit(rng) * 2e7});
    }
  }
  std::array<ResourceRegression, 4> regs{};
  regs[0] = {Resource::kCore, 0.004 + unit(rng) * 0.004, 0.01 + unit(rng) * 0.02,
             0.2 + unit(rng)};
  regs[1] = {Resource::kCache, 0.004 + unit(rng) * 0.004, unit(rng) * 8e-4, unit(rng)};
  regs[2] = {Resource::kDiskBw, 0.004 + unit(rng) * 0.004, unit(rng) * 2e-10, unit(rng)};
  regs[3] = {Resource::kNetworkBw, 0.004 + unit(rng) * 0.004, unit(rng) * 4e-10, unit(rng)};
  // With the slopes above service times stay roughly within 4..40 ms.
  const double lambda = load * 30.0;
  return {std::move(s), CombinedModel(regs), lambda};
}

std::vector<Latency> oracle_latencies(const ClusterSpec& layout,
                                      const std::vector<NodeId>& placement,
                                      const CombinedModel& model, double arrival_rate) {
  const std::size_t m = placement.size();
  const std::size_t t = layout.batch.front().size();
  std::vector<Latency> out(m);
  for (ComponentId c = 0; c < m; ++c) {
    const NodeId n = placement[c];
    ContentionVector others{};
    for (ComponentId r = 0; r < m; ++r) {
      if (r != c && placement[r] == n) {
        others.core_usage += layout.contribution[r].core_usage;
        others.cache_mpki += layout.contribution[r].cache_mpki;
        others.disk_bw += layout.contribution[r].disk_bw;
        others.network_bw += layout.contribution[r].network_bw;
      }
    }
    std::vector<double> x(t);
    double mean = 0.0;
    for (std::size_t s = 0; s < t; ++s) {
      const auto& b = layout.batch[n][s];
      const ContentionVector u{b.core_usage + others.core_usage, b.cache_mpki + others.cache_mpki,
                               b.disk_bw + others.disk_bw, b.network_bw + others.network_bw};
      x[s] = predict_service_time(model, u);
      mean += x[s];
    }
    mean /= static_cast<double>(t);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(t);
    const double rho = arrival_rate * mean;
    if (rho >= 1.0) {
      out[c] = Latency::saturated();
    } else {
      const double c2 = var / (mean * mean);
      const double wait = arrival_rate * (1.0 + c2) * mean * mean / (2.0 * (1.0 - rho));
      out[c] = Latency::seconds(mean + wait);
    }
  }
  return out;
}

Latency oracle_overall(const ClusterSpec& layout, const std::vector<NodeId>& placement,
                       const CombinedModel& model, double arrival_rate) {
  const auto lat = oracle_latencies(layout, placement, model, arrival_rate);
  double total = 0.0;
  for (const auto& stage : layout.stages) {
    double worst = 0.0;
    for (ComponentId c : stage) worst = std::max(worst, lat[c].value());
    total += worst;
  }
  return std::isinf(total) ? Latency::saturated() : Latency::seconds(total);
}

CellValue oracle_cell(const ClusterSpec& layout, const std::vector<NodeId>& placement,
                      const CombinedModel& model, double arrival_rate, ComponentId i, NodeId j) {
  if (placement[i] == j) return {0.0, 0.0};
  auto moved = placement;
  moved[i] = j;
  const auto before_all = oracle_latencies(layout, placement, model, arrival_rate);
  const auto after_all = oracle_latencies(layout, moved, model, arrival_rate);
  const Latency before = oracle_overall(layout, placement, model, arrival_rate);
  const Latency after = oracle_overall(layout, moved, model, arrival_rate);

  CellValue v;
  if (after.is_saturated()) {
    v.reduction = kNegInf;
  } else if (before.is_saturated()) {
    v.reduction = kSaturationCredit - after.value();
  } else {
    v.reduction = before.value() - after.value();
  }
  if (after_all[i].is_saturated()) {
    v.self_reduction = kNegInf;
  } else if (before_all[i].is_saturated()) {
    v.self_reduction = kSaturationCredit - after_all[i].value();
  } else {
    v.self_reduction = before_all[i].value() - after_all[i].value();
  }
  return v;
}

ClusterSpec layout_of(const ClusterState& state) {
  ClusterSpec s;
  s.stages = state.topology().stages();
  s.placement = state.topology().placement();
  for (ComponentId c = 0; c < state.component_count(); ++c) {
    s.contribution.push_back(state.contribution(c));
  }
  for (NodeId n = 0; n < state.node_count(); ++n) {
    s.batch.push_back(state.batch_window(n).to_vectors());
  }
  return s;
}

bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= tol;
}

}  // namespace fixtures
