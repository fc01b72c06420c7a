#pragma once

// Accuracy of the learned service-time model against the simulator's hidden
// ground truth at held-out interference levels.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/harness/scenario.hpp"

namespace pcs::harness {

struct LevelError {
  std::string workload_class;
  double size_gb = 0.0;
  ContentionVector contention;  // co-runner contention at this level
  double predicted = 0.0;       // seconds
  double measured = 0.0;        // mean simulated service time, seconds
  double relative_error = 0.0;  // |predicted - measured| / measured
};

struct PredictionErrorReport {
  std::vector<LevelError> levels;
  std::size_t training_samples = 0;
  double mean_error = 0.0;
  double max_error = 0.0;
  // Fraction of levels with relative error below 3%, 5% and 8%.
  double below_3 = 0.0;
  double below_5 = 0.0;
  double below_8 = 0.0;
};

// Per workload class: trains a model on a monitored single-component run
// that steps one batch job through sizes between the held-out ones, then
// measures each held-out level in its own run with one job of that size.
// Throws kInsufficientTraining when a training run yields no usable model.
PredictionErrorReport prediction_error_report(const ScenarioConfig& config, std::uint64_t seed);

void write_prediction_report(std::ostream& out, const PredictionErrorReport& report);

}  // namespace pcs::harness
