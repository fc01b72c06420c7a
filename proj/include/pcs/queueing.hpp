#pragma once

// M/G/1 component latency and its composition over a multi-stage topology:
// a stage waits for all of its parallel components (max), stages run in
// sequence (sum).

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <vector>

namespace pcs {

using ComponentId = std::size_t;
using NodeId = std::size_t;

// Seconds, or the Saturated marker for a queue at or beyond capacity.
// Saturated compares greater than every finite latency and absorbs max and +.
class Latency {
 public:
  constexpr Latency() = default;

  static constexpr Latency seconds(double s) { return Latency(s); }
  static constexpr Latency saturated() {
    return Latency(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_saturated() const { return value_ == std::numeric_limits<double>::infinity(); }
  // +infinity when saturated.
  constexpr double value() const { return value_; }

  friend constexpr Latency operator+(Latency a, Latency b) { return Latency(a.value_ + b.value_); }
  friend constexpr auto operator<=>(Latency a, Latency b) = default;

 private:
  constexpr explicit Latency(double s) : value_(s) {}
  double value_ = 0.0;
};

struct ComponentLoad {
  double arrival_rate = 0.0;           // requests/second
  double mean_service_time = 0.0;      // seconds, > 0
  double service_time_variance = 0.0;  // seconds^2

  double utilization() const { return arrival_rate * mean_service_time; }
};

// x̄ + λ(1 + C²) / (2μ²(1 − ρ)) with μ = 1/x̄, C² = var/x̄², ρ = λ/μ.
// Saturated when ρ >= 1; throws kInvalidLoad for non-finite or out-of-domain
// inputs.
Latency mg1_latency(const ComponentLoad& load);

// Max over the stage's components; throws kEmptyStage.
Latency stage_latency(std::span<const Latency> component_latencies);

// Sum over stages in order; throws kEmptyTopology.
Latency overall_latency(std::span<const Latency> stage_latencies);

// Ordered stages of parallel components plus the component -> node placement.
// Component ids are dense: 0 .. component_count()-1.
class ServiceTopology {
 public:
  ServiceTopology() = default;
  // Throws kInvalidTopology unless every component 0..m-1 appears in exactly
  // one non-empty stage and placement has one node per component.
  ServiceTopology(std::vector<std::vector<ComponentId>> stages, std::vector<NodeId> placement);

  std::size_t component_count() const { return placement_.size(); }
  std::size_t stage_count() const { return stages_.size(); }
  const std::vector<std::vector<ComponentId>>& stages() const { return stages_; }
  std::size_t stage_of(ComponentId c) const { return stage_of_[c]; }
  NodeId node_of(ComponentId c) const { return placement_[c]; }
  const std::vector<NodeId>& placement() const { return placement_; }

  void move(ComponentId c, NodeId node) { placement_[c] = node; }

  bool operator==(const ServiceTopology&) const = default;

 private:
  std::vector<std::vector<ComponentId>> stages_;
  std::vector<NodeId> placement_;
  std::vector<std::size_t> stage_of_;
};

// Composes stage and overall latency from per-component latencies indexed by
// component id.
Latency overall_from_component_latencies(const ServiceTopology& topology,
                                         std::span<const Latency> latencies);

// mg1 per component -> max per stage -> sum. Throws kMissingLoad naming the
// first component without a load.
Latency predict_overall(const ServiceTopology& topology,
                        const std::map<ComponentId, ComponentLoad>& loads);

}  // namespace pcs
