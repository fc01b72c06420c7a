#include "pcs/harness/prediction_error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "pcs/error.hpp"
#include "pcs/model.hpp"
#include "pcs/sim/engine.hpp"

namespace pcs::harness {
namespace {

sim::SimulationConfig single_component(const ScenarioConfig& config, double rate, double horizon,
                                       std::uint64_t seed) {
  sim::SimulationConfig s;
  s.stages = {{0}};
  s.placement = {0};
  s.node_count = 1;
  s.component_footprint = {config.component_footprint};
  s.truth = config.truth;
  s.arrivals = {{0.0, rate}};
  s.horizon = horizon;
  s.seed = seed;
  s.monitor = config.monitor;
  s.queue_bound = config.queue_bound;
  return s;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return out;
}

}  // namespace

PredictionErrorReport prediction_error_report(const ScenarioConfig& config, std::uint64_t seed) {
  validate_scenario(config);
  const auto& pe = config.prediction;

  // Held-out sizes per class, in order of first mention.
  std::vector<std::pair<const sim::WorkloadClass*, std::vector<double>>> classes;
  for (const auto& level : pe.levels) {
    const sim::WorkloadClass* cls = nullptr;
    for (const auto& c : config.job_mix.classes) {
      if (c.name == level.workload_class) cls = &c;
    }
    if (cls == nullptr) {
      throw Error(ErrorCode::kValidationError, "unknown workload class " + level.workload_class);
    }
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const auto& e) { return e.first == cls; });
    if (it == classes.end()) it = classes.insert(classes.end(), {cls, {}});
    for (double size : log_spaced(level.min_gb, level.max_gb, level.sizes)) {
      it->second.push_back(size);
    }
  }

  PredictionErrorReport report;
  std::uint64_t run = 0;
  for (const auto& [cls, sizes] : classes) {
    // Training sizes sit between the held-out ones (log midpoints), so no
    // evaluated level is ever seen during training.
    std::vector<double> sorted = sizes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> train_sizes;
    if (sorted.size() == 1) {
      train_sizes = {sorted[0] / 2.0, sorted[0] * 2.0};
    } else {
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        train_sizes.push_back(std::sqrt(sorted[i] * sorted[i + 1]));
      }
    }

    // One idle segment, then one job per training size, back to back.
    const double horizon = pe.training_segment * static_cast<double>(train_sizes.size() + 1);
    sim::SimulationConfig training = single_component(config, pe.training_rate, horizon, seed);
    for (std::size_t i = 0; i < train_sizes.size(); ++i) {
      training.interference.push_back(sim::BatchJobSpec{
          cls->name, pe.training_segment * static_cast<double>(i + 1), pe.training_segment,
          cls->footprint_at_full * sim::intensity_for_size(*cls, train_sizes[i]), 0,
          train_sizes[i]});
    }
    training.monitor.training_window = horizon;
    training.collect_training = true;
    sim::Simulator trainer(std::move(training));
    trainer.run_until(horizon);
    const auto samples = trainer.training_samples();
    report.training_samples += samples.size();

    std::optional<CombinedModel> model;
    try {
      model.emplace(train_combined_model(samples));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInsufficientTraining, cls->name + ": " +
                                                        std::to_string(samples.size()) +
                                                        " training samples: " + e.detail());
    }

    for (double size : sizes) {
      const ContentionVector u = cls->footprint_at_full * sim::intensity_for_size(*cls, size);
      sim::SimulationConfig eval = single_component(config, pe.evaluation_rate,
                                                    pe.evaluation_duration,
                                                    seed * 1'000'003 + ++run);
      eval.interference = {
          sim::BatchJobSpec{cls->name, 0.0, pe.evaluation_duration * 2, u, 0, size}};
      eval.record_replicas = true;
      const auto trace = sim::run_simulation(std::move(eval));

      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : trace.replicas) {
        if (r.finish_ns < 0) continue;
        sum += static_cast<double>(r.finish_ns - r.start_ns) * 1e-9;
        ++n;
      }
      if (n == 0) throw Error(ErrorCode::kEmptyTrace, "held-out level produced no completions");

      LevelError e;
      e.workload_class = cls->name;
      e.size_gb = size;
      e.contention = u;
      e.predicted = predict_service_time(*model, u);
      e.measured = sum / static_cast<double>(n);
      e.relative_error = std::fabs(e.predicted - e.measured) / e.measured;
      report.levels.push_back(e);
    }
  }

  if (!report.levels.empty()) {
    double sum = 0.0;
    std::size_t b3 = 0, b5 = 0, b8 = 0;
    for (const auto& l : report.levels) {
      sum += l.relative_error;
      report.max_error = std::max(report.max_error, l.relative_error);
      b3 += l.relative_error < 0.03;
      b5 += l.relative_error < 0.05;
      b8 += l.relative_error < 0.08;
    }
    const auto n = static_cast<double>(report.levels.size());
    report.mean_error = sum / n;
    report.below_3 = static_cast<double>(b3) / n;
    report.below_5 = static_cast<double>(b5) / n;
    report.below_8 = static_cast<double>(b8) / n;
  }
  return report;
}

void write_prediction_report(std::ostream& out, const PredictionErrorReport& r) {
  char line[256];
  out << "class,size_gb,core_usage,cache_mpki,disk_bw,network_bw,predicted_ms,measured_ms,"
         "relative_error\n";
  for (const auto& l : r.levels) {
    std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,%.6g,%.6g,%.6f,%.6f,%.6f\n",
                  l.workload_class.c_str(), l.size_gb, l.contention.core_usage,
                  l.contention.cache_mpki, l.contention.disk_bw, l.contention.network_bw,
                  l.predicted * 1e3, l.measured * 1e3, l.relative_error);
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "\ntraining samples %zu\nlevels %zu\nmean error %.2f%%\nmax error %.2f%%\n"
                "below 3%% %.2f%%\nbelow 5%% %.2f%%\nbelow 8%% %.2f%%\n",
                r.training_samples, r.levels.size(), 100.0 * r.mean_error, 100.0 * r.max_error,
                100.0 * r.below_3, 100.0 * r.below_5, 100.0 * r.below_8);
  out << line;
}

}  // namespace pcs::harness
