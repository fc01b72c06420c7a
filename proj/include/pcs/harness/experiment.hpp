#pragma once

// Policy sweeps: every (policy, arrival rate, seed) cell of a scenario is one
// independent simulation. Cells run concurrently; a failed cell is reported
// and never disturbs the others.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcs/harness/scenario.hpp"
#include "pcs/perf_matrix.hpp"
#include "pcs/sim/engine.hpp"
#include "pcs/sim/metrics.hpp"

namespace pcs::harness {

inline constexpr const char* kResultsHeader =
    "policy,lambda,seed,p99_component_ms,mean_overall_ms,migrations,saturated,sched_ms";

struct CellResult {
  std::string policy;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // set when !ok
  sim::MetricsReport metrics;
  std::vector<sim::MigrationEvent> migrations;
  double sched_ms = 0.0;  // wall time spent in the scheduler
};

struct ExperimentReport {
  std::vector<CellResult> cells;  // policy-major, then rate, then seed

  std::size_t failed() const;
};

struct ExperimentOptions {
  std::size_t parallelism = 1;
  // When set, each cell's trace is written to <dir>/<policy>_<lambda>_<seed>.ndjson.
  std::optional<std::filesystem::path> trace_dir;
};

ExperimentReport run_experiment(const ScenarioConfig& config, const ExperimentOptions& options = {});

// One row per cell; failed cells keep their key and leave the metrics empty.
void write_results_csv(std::ostream& out, const ExperimentReport& report);

// policy, lambda, seed, then the scheduler's per-migration log fields; tab-separated.
void write_migration_log(std::ostream& out, const ExperimentReport& report);

// Per-rate text table (means over successful seeds) and the PCS reductions
// against each other policy, averaged with equal weight per rate.
void write_summary(std::ostream& out, const ExperimentReport& report);

// results.csv, migrations.tsv and summary.txt under dir (created if needed).
void write_outputs(const std::filesystem::path& dir, const ExperimentReport& report);

std::string trace_file_name(const std::string& policy, double lambda, std::uint64_t seed);

// Performance matrix PCS built at its interval-th scheduling round (1-based)
// in the first rate/seed cell of the scenario; nullopt if that round never
// ran or was skipped for lack of training data.
std::optional<PerformanceMatrix> capture_matrix(const ScenarioConfig& config,
                                                std::size_t interval);

}  // namespace pcs::harness
