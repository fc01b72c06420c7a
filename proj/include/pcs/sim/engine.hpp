#pragma once

// Discrete-event simulation of a multi-stage fan-out service on shared nodes.
//
// Every stage sends each request to all of its components; a component is a
// FIFO single server. Service times are drawn from a hidden ground-truth
// generator driven by the contention the component's co-runners create, so
// the learned model used by the PCS policy is an estimate, not the truth.
// Simulated time is integer nanoseconds and events are ordered by
// (time, sequence number), which makes a run a pure function of its config.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/perf_matrix.hpp"
#include "pcs/queueing.hpp"
#include "pcs/scheduler.hpp"
#include "pcs/sim/interference.hpp"

namespace pcs::sim {

enum class ServiceDistribution { kExponential, kLognormal, kDeterministic };

std::string_view to_string(ServiceDistribution d);
ServiceDistribution parse_distribution(std::string_view name);

// mean = speed * (base + slope . u + nonlinear_core * u_core^2), with u the
// clamped co-runner contention.
struct GroundTruth {
  double base_service_time = 0.010;  // seconds
  ContentionVector slope{0.02, 0.0004, 1e-10, 1e-10};
  double nonlinear_core = 0.0;
  ServiceDistribution distribution = ServiceDistribution::kLognormal;
  double scv = 1.0;  // squared coefficient of variation, lognormal only

  double mean_service_time(const ContentionVector& co_runners, double speed = 1.0) const;

  bool operator==(const GroundTruth&) const = default;
};

struct BasicPolicy {
  bool operator==(const BasicPolicy&) const = default;
};
struct RedundancyPolicy {
  std::size_t replicas = 3;
  bool operator==(const RedundancyPolicy&) const = default;
};
struct ReissuePolicy {
  double percentile = 99.0;
  double prior = 0.050;  // seconds, used until enough completions are seen
  bool operator==(const ReissuePolicy&) const = default;
};
struct PcsPolicy {
  SchedulerConfig scheduler;
  double interval = 600.0;  // seconds
  bool operator==(const PcsPolicy&) const = default;
};

using PolicySpec = std::variant<BasicPolicy, RedundancyPolicy, ReissuePolicy, PcsPolicy>;

// basic | red-<k> | ri-<p> | pcs
std::string policy_name(const PolicySpec& policy);
// Inverse of policy_name; PCS gets default scheduler settings. Throws kBadConfig.
PolicySpec parse_policy(std::string_view name);

struct MigrationCostModel {
  // A migrating component accepts requests but serves none for this long;
  // the migrations of one interval run back to back.
  double per_migration_delay = 0.15;
  bool operator==(const MigrationCostModel&) const = default;
};

struct MonitorConfig {
  double noise = 0.0;               // relative std-dev of zero-mean reading noise
  double system_period = 1.0;       // seconds between core/disk/network samples
  double micro_period = 60.0;       // seconds between cache samples
  double rate_window = 60.0;        // seconds of arrivals behind the rate estimate
  double training_window = 600.0;   // seconds of samples the model is trained on
  std::size_t schedule_samples = 60;  // contention samples per node handed to the scheduler
  bool operator==(const MonitorConfig&) const = default;
};

// Piecewise-constant Poisson arrival rate; phases ascend by start, first at 0.
struct RatePhase {
  double start = 0.0;
  double rate = 0.0;
  bool operator==(const RatePhase&) const = default;
};

struct ReplicaRecord {
  std::uint64_t request = 0;
  std::uint32_t stage = 0;
  ComponentId logical = 0;    // component the work belongs to
  ComponentId component = 0;  // component whose queue served it
  NodeId node = 0;
  std::int64_t dispatch_ns = 0;
  std::int64_t start_ns = -1;   // -1 if never started
  std::int64_t finish_ns = -1;  // -1 if never finished
  bool replica = false;         // false for the primary copy
  bool cancelled = false;
};

struct RequestRecord {
  std::uint64_t id = 0;
  std::int64_t arrival_ns = 0;
  std::int64_t completion_ns = -1;  // -1 when the run aborted first
};

struct MigrationEvent {
  std::size_t interval = 0;
  double time = 0.0;  // when the component became unavailable
  Migration migration;
};

struct SimulationCounters {
  std::uint64_t replicas_dispatched = 0;
  std::uint64_t replicas_served = 0;     // started service
  std::uint64_t replicas_cancelled = 0;  // removed from a queue before starting
  std::uint64_t replicas_wasted = 0;     // finished after their sibling already won
  std::uint64_t reissues = 0;
  std::uint64_t schedule_calls = 0;
};

struct SimulationTrace {
  std::vector<RequestRecord> requests;
  // Winning-replica latency (dispatch to finish, seconds) by serving
  // component, for requests that arrived after the warm-up.
  std::vector<std::vector<double>> component_latencies;
  std::vector<ReplicaRecord> replicas;  // only when recording was requested
  std::vector<MigrationEvent> migrations;
  std::vector<double> busy_time;  // seconds per component
  SimulationCounters counters;
  double warmup = 0.0;
  double horizon = 0.0;
  double scheduler_seconds = 0.0;  // wall-clock time spent in the scheduler
  bool saturated = false;
  std::string saturation_reason;
};

// Called after each PCS scheduling decision (interval index from 1).
using ScheduleHook = std::function<void(std::size_t interval, const PerformanceMatrix& matrix,
                                        const ClusterState& state, const ScheduleResult& result)>;

struct SimulationConfig {
  std::vector<std::vector<ComponentId>> stages;
  std::vector<NodeId> placement;
  std::size_t node_count = 0;
  std::vector<double> node_speed;                      // empty means 1 everywhere
  std::vector<ContentionVector> component_footprint;  // U_ci per component
  GroundTruth truth;
  std::vector<BatchJobSpec> interference;
  PolicySpec policy = BasicPolicy{};
  std::vector<RatePhase> arrivals;
  double horizon = 0.0;           // arrivals stop here; queued work drains
  std::uint64_t max_requests = 0;  // 0 = no cap
  double warmup = 0.0;            // requests arriving earlier are not measured
  std::uint64_t seed = 1;
  MonitorConfig monitor;
  MigrationCostModel migration;
  double cancel_delay = 0.0005;  // seconds for a cancellation to reach a queue
  std::size_t queue_bound = 1'000'000;
  std::size_t reissue_window = 10'000;
  double model_floor = 1e-4;
  bool record_replicas = false;
  bool collect_training = false;  // keep model samples even when the policy is not PCS
  ScheduleHook on_schedule;
};

struct MonitorSnapshot {
  ContentionVector batch_contribution;  // running batch jobs
  ContentionVector aggregate;           // batch jobs plus every hosted component
  double arrival_rate = 0.0;            // windowed estimate, requests/second
};

class Simulator {
 public:
  // Throws kBadConfig for an inconsistent configuration.
  explicit Simulator(SimulationConfig config);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  // Processes every event up to and including time t (seconds).
  void run_until(double t);
  double now() const;

  // Reading of c's node as the monitor would take it right now.
  MonitorSnapshot monitor_snapshot(ComponentId c);

  // Runs to the end, draining queued work, and hands over the trace.
  SimulationTrace finish();

  // Per-second (co-runner contention, mean observed service time) samples
  // inside the training window; filled under PCS or with collect_training.
  std::vector<TrainingSample> training_samples() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimulationTrace run_simulation(SimulationConfig config);

// One JSON object per line: request records, then replica records when they
// were recorded. Integer nanosecond times keep the output byte-stable.
void write_trace_ndjson(std::ostream& out, const SimulationTrace& trace);

}  // namespace pcs::sim
