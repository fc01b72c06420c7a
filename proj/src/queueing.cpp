#include "pcs/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcs/error.hpp"

namespace pcs {

Latency mg1_latency(const ComponentLoad& load) {
  const double lambda = load.arrival_rate;
  const double mean = load.mean_service_time;
  const double var = load.service_time_variance;
  if (!std::isfinite(lambda) || !std::isfinite(mean) || !std::isfinite(var) || lambda < 0.0 ||
      mean <= 0.0 || var < 0.0) {
    throw Error(ErrorCode::kInvalidLoad, "arrival rate, mean and variance must be finite, "
                                         "non-negative, with a positive mean service time");
  }
  const double mu = 1.0 / mean;
  const double rho = lambda / mu;
  if (rho >= 1.0) return Latency::saturated();
  const double c2 = var / (mean * mean);
  return Latency::seconds(mean + lambda * (1.0 + c2) / (2.0 * mu * mu * (1.0 - rho)));
}

Latency stage_latency(std::span<const Latency> component_latencies) {
  if (component_latencies.empty()) throw Error(ErrorCode::kEmptyStage, "stage has no components");
  return *std::max_element(component_latencies.begin(), component_latencies.end());
}

Latency overall_latency(std::span<const Latency> stage_latencies) {
  if (stage_latencies.empty()) throw Error(ErrorCode::kEmptyTopology, "topology has no stages");
  Latency total = Latency::seconds(0.0);
  for (Latency l : stage_latencies) total = total + l;
  return total;
}

ServiceTopology::ServiceTopology(std::vector<std::vector<ComponentId>> stages,
                                 std::vector<NodeId> placement)
    : stages_(std::move(stages)), placement_(std::move(placement)) {
  if (stages_.empty()) throw Error(ErrorCode::kInvalidTopology, "topology has no stages");
  const std::size_t m = placement_.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  stage_of_.assign(m, kUnset);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    if (stages_[s].empty()) {
      throw Error(ErrorCode::kInvalidTopology, "stage " + std::to_string(s) + " is empty");
    }
    for (ComponentId c : stages_[s]) {
      if (c >= m) {
        throw Error(ErrorCode::kInvalidTopology,
                    "component " + std::to_string(c) + " has no placement");
      }
      if (stage_of_[c] != kUnset) {
        throw Error(ErrorCode::kInvalidTopology,
                    "component " + std::to_string(c) + " appears in more than one stage");
      }
      stage_of_[c] = s;
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (stage_of_[c] == kUnset) {
      throw Error(ErrorCode::kInvalidTopology,
                  "component " + std::to_string(c) + " belongs to no stage");
    }
  }
}

Latency overall_from_component_latencies(const ServiceTopology& topology,
                                         std::span<const Latency> latencies) {
  std::vector<Latency> stage_values;
  stage_values.reserve(topology.stage_count());
  std::vector<Latency> members;
  for (const auto& stage : topology.stages()) {
    members.clear();
    for (ComponentId c : stage) members.push_back(latencies[c]);
    stage_values.push_back(stage_latency(members));
  }
  return overall_latency(stage_values);
}

Latency predict_overall(const ServiceTopology& topology,
                        const std::map<ComponentId, ComponentLoad>& loads) {
  std::vector<Latency> latencies(topology.component_count());
  for (ComponentId c = 0; c < topology.component_count(); ++c) {
    const auto it = loads.find(c);
    if (it == loads.end()) {
      throw Error(ErrorCode::kMissingLoad, "no load for component " + std::to_string(c));
    }
    latencies[c] = mg1_latency(it->second);
  }
  return overall_from_component_latencies(topology, latencies);
}

}  // namespace pcs
