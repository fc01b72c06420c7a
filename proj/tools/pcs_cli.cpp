// pcs: run policy sweeps, prediction-error and scalability reports, and dump
// performance matrices from scenario files.
//
// Exit status: 0 on success, 2 when some sweep cells failed, 1 on a
// configuration or usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pcs/error.hpp"
#include "pcs/harness/experiment.hpp"
#include "pcs/harness/prediction_error.hpp"
#include "pcs/harness/scalability.hpp"
#include "pcs/harness/scenario.hpp"
#include "pcs/kernels.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartialFailure = 2;

std::filesystem::path output_dir(const std::string& flag, const pcs::harness::ScenarioConfig& c) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PCS_OUT_DIR"); env != nullptr && *env != '\0') return env;
  if (!c.output_dir.empty()) return c.output_dir;
  return "pcs-out";
}

int cmd_run(const std::string& scenario, const std::string& out_flag, std::size_t parallelism,
            bool traces) {
  const auto config = pcs::harness::load_scenario(scenario);
  const auto dir = output_dir(out_flag, config);
  pcs::harness::ExperimentOptions options;
  options.parallelism = parallelism;
  if (traces) options.trace_dir = dir / "traces";
  const auto report = pcs::harness::run_experiment(config, options);
  pcs::harness::write_outputs(dir, report);
  pcs::harness::write_summary(std::cout, report);
  std::cout << "wrote " << (dir / "results.csv").string() << '\n';
  if (report.failed() > 0) {
    std::cerr << report.failed() << " of " << report.cells.size() << " cells failed\n";
    return kPartialFailure;
  }
  return kOk;
}

int cmd_predict_error(const std::string& scenario, std::uint64_t seed) {
  const auto config = pcs::harness::load_scenario(scenario);
  const auto report = pcs::harness::prediction_error_report(config, seed);
  pcs::harness::write_prediction_report(std::cout, report);
  return kOk;
}

int cmd_scalability(const std::vector<std::size_t>& ms, const std::vector<std::size_t>& ks,
                    std::size_t repetitions) {
  pcs::harness::ScalabilityOptions options;
  options.repetitions = repetitions;
  const auto report = pcs::harness::scalability_report(ms, ks, options);
  pcs::harness::write_scalability_table(std::cout, report, ks);
  return kOk;
}

int cmd_dump_matrix(const std::string& scenario, std::size_t interval) {
  const auto config = pcs::harness::load_scenario(scenario);
  const auto matrix = pcs::harness::capture_matrix(config, interval);
  if (!matrix) {
    std::cerr << "no matrix: scheduling round " << interval
              << " did not run or had too little training data\n";
    return kConfigError;
  }
  pcs::write_matrix_csv(std::cout, *matrix);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive component-level scheduling simulator"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Kernel backend (scalar, avx2, neon); default picks the best");

  std::string scenario, out;
  std::size_t parallelism = 1;
  bool traces = false;
  auto* run = app.add_subcommand("run", "Run every (policy, rate, seed) cell of a scenario");
  run->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (default: $PCS_OUT_DIR, then the scenario's)");
  run->add_option("--parallelism", parallelism, "Cells run concurrently")
      ->check(CLI::PositiveNumber);
  run->add_flag("--traces", traces, "Also export one NDJSON trace per cell");

  std::uint64_t seed = 1;
  auto* predict = app.add_subcommand("predict-error", "Model accuracy at held-out levels");
  predict->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  predict->add_option("--seed", seed, "Seed for training and evaluation runs");

  std::vector<std::size_t> ms{80, 160, 320, 640}, ks{128};
  std::size_t repetitions = 3;
  auto* scal = app.add_subcommand("scalability", "Scheduler wall time over cluster sizes");
  scal->add_option("--m", ms, "Component counts")->delimiter(',')->check(CLI::PositiveNumber);
  scal->add_option("--k", ks, "Node counts")->delimiter(',')->check(CLI::PositiveNumber);
  scal->add_option("--repetitions", repetitions, "Timed runs per point; the best is kept");

  std::size_t interval = 1;
  auto* dump = app.add_subcommand("dump-matrix", "Performance matrix of one PCS round as CSV");
  dump->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  dump->add_option("--interval", interval, "1-based scheduling round")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (!simd.empty()) {
      using pcs::kernels::Backend;
      bool found = false;
      for (Backend b : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
        if (pcs::kernels::to_string(b) != simd) continue;
        if (!pcs::kernels::supported(b)) break;
        pcs::kernels::set_active(b);
        found = true;
      }
      if (!found) {
        std::cerr << "kernel backend " << simd << " is unknown or unavailable here\n";
        return kConfigError;
      }
    }
    if (*run) return cmd_run(scenario, out, parallelism, traces);
    if (*predict) return cmd_predict_error(scenario, seed);
    if (*scal) return cmd_scalability(ms, ks, repetitions);
    if (*dump) return cmd_dump_matrix(scenario, interval);
  } catch (const pcs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
