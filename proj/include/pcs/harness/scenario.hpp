#pragma once

// Scenario files: one YAML document describing the service, the cluster, the
// interference mix and the sweep to run. See README.md for the grammar.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/scheduler.hpp"
#include "pcs/sim/engine.hpp"
#include "pcs/sim/interference.hpp"

namespace pcs::harness {

enum class PlacementKind { kRoundRobin, kExplicit };

struct TopologySpec {
  std::vector<std::size_t> stage_sizes;  // components per stage; ids assigned in order
  std::size_t nodes = 0;
  PlacementKind placement_kind = PlacementKind::kRoundRobin;
  std::vector<NodeId> placement;  // explicit placement, one node per component
  std::vector<double> node_speed;  // empty means 1 everywhere

  bool operator==(const TopologySpec&) const = default;
};

// Held-out evaluation levels for the prediction-error report: `sizes` input
// sizes spaced log-uniformly over [min_gb, max_gb] for one workload class.
struct EvaluationClass {
  std::string workload_class;
  std::size_t sizes = 0;
  double min_gb = 0.0;
  double max_gb = 0.0;

  bool operator==(const EvaluationClass&) const = default;
};

struct PredictionErrorSpec {
  double training_rate = 20.0;     // requests/second while training
  double training_segment = 60.0;  // seconds per training job, whole seconds or more
  double evaluation_rate = 20.0;     // requests/second per held-out level
  double evaluation_duration = 600.0;
  std::vector<EvaluationClass> levels;

  bool operator==(const PredictionErrorSpec&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  TopologySpec topology;
  ContentionVector component_footprint;
  sim::GroundTruth truth;
  sim::JobMix job_mix;
  std::vector<double> arrival_rates;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  double horizon = 2000.0;
  double warmup = 0.0;
  std::uint64_t max_requests = 0;
  SchedulerConfig scheduler;
  double schedule_interval = 600.0;
  sim::MigrationCostModel migration;
  sim::MonitorConfig monitor;
  double cancel_delay = 0.0005;
  std::size_t queue_bound = 200'000;
  std::size_t reissue_window = 10'000;
  double reissue_prior = 0.05;
  std::string output_dir;  // empty: caller decides
  PredictionErrorSpec prediction;

  bool operator==(const ScenarioConfig&) const = default;
};

// Parses and validates; missing optional keys take the defaults above.
// Throws kParseError for malformed YAML or a value of the wrong type and
// kValidationError for an inconsistent setting. Messages name the field and
// its line.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Emits every field, defaults included, so the output reloads to an equal
// config.
std::string serialize_scenario(const ScenarioConfig& config);

// Semantic checks shared by the loader and programmatic callers.
void validate_scenario(const ScenarioConfig& config);

std::vector<std::vector<ComponentId>> stage_components(const TopologySpec& topology);
std::vector<NodeId> initial_placement(const TopologySpec& topology);

// Simulation of one sweep cell. The interference trace depends on the seed
// only, so every policy faces the same batch jobs.
sim::SimulationConfig make_simulation(const ScenarioConfig& config, const std::string& policy,
                                      double arrival_rate, std::uint64_t seed);

sim::PolicySpec resolve_policy(const ScenarioConfig& config, const std::string& policy);

}  // namespace pcs::harness
