// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// usage: acceptance <standard-scenario.yaml> <prediction-scenario.yaml>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "pcs/harness/experiment.hpp"
#include "pcs/harness/prediction_error.hpp"
#include "pcs/harness/scalability.hpp"
#include "pcs/harness/scenario.hpp"
#include "pcs/queueing.hpp"
#include "pcs/scheduler.hpp"
#include "pcs/sim/engine.hpp"
#include "pcs/sim/metrics.hpp"

using namespace pcs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int failures = 0;

void report(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += fmt(" (over the %.0f s budget)", budget_s);
  }
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
            << fmt("  [%.2f s]", secs) << std::endl;
}

Outcome mg1_closed_form() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0, worst_half = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double mu = 10.0 + 990.0 * unit(rng);
    const double lambda = mu * (0.01 + 0.98 * unit(rng));
    const double x = 1.0 / mu;
    const double expo = mg1_latency({lambda, x, x * x}).value();
    const double exact = 1.0 / (mu - lambda);
    worst = std::max(worst, std::fabs(expo - exact) / exact);
    const double det = mg1_latency({lambda, x, 0.0}).value();
    worst_half = std::max(worst_half, std::fabs((det - x) / (expo - x) - 0.5));
  }
  return {worst <= 1e-12 && worst_half <= 1e-12,
          fmt("max rel err vs 1/(mu-lambda) %.2e; deterministic/exponential queueing ratio off "
              "0.5 by %.2e",
              worst, worst_half)};
}

Outcome mm1_simulation() {
  std::string detail;
  bool pass = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    sim::SimulationConfig c;
    c.stages = {{0}};
    c.placement = {0};
    c.node_count = 1;
    c.component_footprint = {ContentionVector{}};
    c.truth.base_service_time = 0.010;
    c.truth.slope = {};
    c.truth.distribution = sim::ServiceDistribution::kExponential;
    c.arrivals = {{0.0, 50.0}};
    c.max_requests = 1'000'000;
    c.horizon = 1e7;
    c.seed = seed;
    const double mean = sim::compute_metrics(sim::run_simulation(std::move(c))).mean_overall;
    pass = pass && std::fabs(mean - 0.020) <= 0.05 * 0.020;
    detail += fmt("seed %llu %.3f ms; ", static_cast<unsigned long long>(seed), mean * 1e3);
  }
  return {pass, detail + "target 20 ms +/- 5%"};
}

Outcome matrix_updates() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  std::size_t steps = 0, cells = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng() % 7, k = 2 + rng() % 4;
    const auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % 3, 1 + rng() % 5,
                                             0.2 + 0.6 * (trial % 5) / 4.0);
    const auto state = fixtures::make_state(rc.layout);
    SchedulerConfig cfg;
    cfg.epsilon = 0.0;
    schedule(state, rc.model, rc.arrival_rate, cfg, [&](const ScheduleStep& step) {
      ++steps;
      const auto fresh = build_matrix(*step.state, rc.model, rc.arrival_rate);
      for (ComponentId i = 0; i < m; ++i) {
        if (!(*step.candidates)[i]) continue;
        for (NodeId j : {step.migration->origin, step.migration->destination}) {
          const double a = step.matrix->reduction(i, j), b = fresh.reduction(i, j);
          ++cells;
          if (std::isinf(a) || std::isinf(b)) {
            if (a != b) worst = INFINITY;
          } else {
            worst = std::max(worst, std::fabs(a - b));
          }
        }
      }
    });
  }
  return {worst <= 1e-9 && steps > 0,
          fmt("50 fixtures, %zu migrations, %zu cells compared, max |diff| %.2e s", steps, cells,
              worst)};
}

Outcome greedy_vs_exhaustive() {
  std::mt19937_64 rng(107);
  std::size_t weak_steps = 0, worse = 0, beats_optimum = 0;
  double gap_sum = 0.0, gap_max = 0.0;
  std::size_t counted = 0, moves = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 5, k = 2 + rng() % 3;
    const auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % 3, 3, 0.4);
    const auto state = fixtures::make_state(rc.layout);
    SchedulerConfig cfg;
    cfg.epsilon = 0.0;
    const auto greedy = schedule(state, rc.model, rc.arrival_rate, cfg);
    const auto best = brute_force_allocate(state, rc.model, rc.arrival_rate);

    auto placement = rc.layout.placement;
    const Latency baseline =
        fixtures::oracle_overall(rc.layout, placement, rc.model, rc.arrival_rate);
    for (const auto& mig : greedy.plan.migrations) {
      const auto cell = fixtures::oracle_cell(rc.layout, placement, rc.model, rc.arrival_rate,
                                              mig.component, mig.destination);
      weak_steps += !(cell.reduction > cfg.epsilon);
      placement[mig.component] = mig.destination;
      ++moves;
    }
    const Latency final_overall =
        fixtures::oracle_overall(rc.layout, placement, rc.model, rc.arrival_rate);
    worse += !(final_overall <= baseline);
    // The exhaustive search and the oracle sum in different orders, so equal
    // placements can differ in the last bits.
    beats_optimum += final_overall.value() < best.optimal_overall.value() * (1.0 - 1e-12);
    if (!final_overall.is_saturated() && !best.optimal_overall.is_saturated()) {
      const double gap = std::max(0.0, (final_overall.value() - best.optimal_overall.value()) /
                                           best.optimal_overall.value());
      gap_sum += gap;
      gap_max = std::max(gap_max, gap);
      ++counted;
    }
  }
  const bool pass = weak_steps == 0 && worse == 0 && beats_optimum == 0;
  return {pass, fmt("100 fixtures, %zu migrations; optimality gap mean %.3f%% max %.3f%%; "
                    "steps not above epsilon %zu, ends above baseline %zu, below optimum %zu",
                    moves, counted ? 100.0 * gap_sum / static_cast<double>(counted) : 0.0,
                    100.0 * gap_max, weak_steps, worse, beats_optimum)};
}

Outcome worked_examples() {
  constexpr double kMs = 1e-3;
  const auto model = fixtures::core_only_model();
  const auto hot = fixtures::make_state(fixtures::hotspot_cluster());
  const auto matrix = build_matrix(hot, model, 0.0);
  auto moved = hot;
  moved.apply_migration(1, 3);
  const double before = matrix.baseline_overall().value();
  const double after = predict_placement_overall(moved, model, 0.0).value();
  const double cell = matrix.reduction(1, 3);
  const bool fig3 = std::fabs(before - 57 * kMs) < 1e-12 && std::fabs(after - 39 * kMs) < 1e-12 &&
                    std::fabs(cell - 18 * kMs) < 1e-12;

  const auto tie = fixtures::make_state(fixtures::tie_cluster());
  const auto tm = build_matrix(tie, model, 0.0);
  SchedulerConfig cfg;  // epsilon 5 ms
  const auto result = schedule(tie, model, 0.0, cfg);
  const bool fig4 = std::fabs(tm.reduction(1, 0) - tm.reduction(1, 3)) < 1e-12 &&
                    std::fabs(tm.self_reduction(1, 0) - 20 * kMs) < 1e-12 &&
                    std::fabs(tm.self_reduction(1, 3) - 30 * kMs) < 1e-12 &&
                    result.plan.migrations.size() == 1 &&
                    result.plan.migrations[0].component == 1 &&
                    result.plan.migrations[0].destination == 3;
  return {fig3 && fig4,
          fmt("L[c2][n4] = %.3f - %.3f = %.3f ms; tie c2->n1 / c2->n4 self %.0f / %.0f ms, plan "
              "of %zu move(s) to n%u",
              before / kMs, after / kMs, cell / kMs, tm.self_reduction(1, 0) / kMs,
              tm.self_reduction(1, 3) / kMs, result.plan.migrations.size(),
              result.plan.migrations.empty() ? 0u
                                             : static_cast<unsigned>(
                                                   result.plan.migrations[0].destination + 1))};
}

struct Sweep {
  harness::ScenarioConfig config;
  harness::ExperimentReport report;
  double seconds = 0.0;
  // (policy, lambda) -> per-seed cells
  std::map<std::pair<std::string, double>, std::vector<const harness::CellResult*>> by_key;
};

Sweep run_standard(const std::filesystem::path& scenario) {
  Sweep s;
  s.config = harness::load_scenario(scenario);
  const auto t0 = std::chrono::steady_clock::now();
  s.report = harness::run_experiment(s.config);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : s.report.cells) s.by_key[{c.policy, c.lambda}].push_back(&c);
  return s;
}

// Seeds on which pred holds for cells a and b taken seed by seed.
std::size_t seeds_where(const Sweep& s, const std::string& a, const std::string& b, double lambda,
                        const std::function<bool(const harness::CellResult&,
                                                 const harness::CellResult&)>& pred) {
  const auto& xs = s.by_key.at({a, lambda});
  const auto& ys = s.by_key.at({b, lambda});
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (xs[i]->ok && ys[i]->ok && pred(*xs[i], *ys[i])) ++n;
  }
  return n;
}

bool lower_mean(const harness::CellResult& a, const harness::CellResult& b) {
  return a.metrics.mean_overall < b.metrics.mean_overall;
}

Outcome redundancy_harm(const Sweep& s) {
  const double light = s.config.arrival_rates.front(), heavy = s.config.arrival_rates.back();
  const std::size_t seeds = s.config.seeds.size(), need = seeds / 2 + 1;
  bool load_ok = true;
  double rho_light = 0.0, rho_heavy = 1.0;
  for (const auto* c : s.by_key.at({"basic", light})) {
    load_ok = load_ok && c->ok && c->metrics.max_utilization <= 0.2;
    rho_light = std::max(rho_light, c->metrics.max_utilization);
  }
  for (const auto* c : s.by_key.at({"basic", heavy})) {
    load_ok = load_ok && c->ok && c->metrics.max_utilization >= 0.8;
    rho_heavy = std::min(rho_heavy, c->metrics.max_utilization);
  }
  const std::size_t a = seeds_where(s, "red-3", "basic", light, lower_mean);
  const std::size_t b = seeds_where(s, "basic", "red-3", heavy, lower_mean);
  const std::size_t c = seeds_where(s, "red-3", "red-5", heavy, lower_mean);
  const bool pass = load_ok && a >= need && b >= need && c >= need;
  return {pass, fmt("basic rho light<=%.3f heavy>=%.3f; seeds with RED-3<Basic (light) %zu/%zu, "
                    "Basic<RED-3 (heavy) %zu/%zu, RED-3<RED-5 (heavy) %zu/%zu",
                    rho_light, rho_heavy, a, seeds, b, seeds, c, seeds, seeds)};
}

Outcome pcs_dominance(const Sweep& s) {
  const std::size_t seeds = s.config.seeds.size(), need = seeds / 2 + 1;
  bool pass = true;
  std::size_t weakest = seeds;
  std::string worst_case;
  for (double lambda : s.config.arrival_rates) {
    for (const char* other : {"basic", "red-3", "red-5", "ri-90", "ri-99"}) {
      const std::size_t p99 = seeds_where(s, "pcs", other, lambda, [](const auto& a, const auto& b) {
        return a.metrics.max_p99 < b.metrics.max_p99;
      });
      const std::size_t mean = seeds_where(s, "pcs", other, lambda, lower_mean);
      pass = pass && p99 >= need && mean >= need;
      if (std::min(p99, mean) < weakest) {
        weakest = std::min(p99, mean);
        worst_case = fmt("%s at lambda %g", other, lambda);
      }
    }
  }
  return {pass, fmt("%zu rates x 5 baselines x 2 metrics; weakest seed count %zu/%zu%s%s",
                    s.config.arrival_rates.size(), weakest, seeds,
                    worst_case.empty() ? "" : " vs ", worst_case.c_str())};
}

Outcome prediction_shape(const std::filesystem::path& scenario) {
  const auto config = harness::load_scenario(scenario);
  const auto r = harness::prediction_error_report(config, 1);
  const bool pass = r.mean_error <= 0.08 && r.below_3 <= r.below_5 && r.below_5 <= r.below_8;
  return {pass, fmt("%zu levels, mean error %.2f%%, max %.2f%%, below 3/5/8%%: %.1f/%.1f/%.1f%%",
                    r.levels.size(), 100 * r.mean_error, 100 * r.max_error, 100 * r.below_3,
                    100 * r.below_5, 100 * r.below_8)};
}

Outcome scalability() {
  const auto r = harness::scalability_report({80, 160, 320, 640}, {128});
  const auto& last = r.points.back();
  const double exponent = r.exponent_by_k.front();
  const bool pass = last.m == 640 && last.k == 128 && last.seconds <= 5.0 && exponent >= 1.5 &&
                    exponent <= 2.5;
  return {pass, fmt("schedule() at m=640 k=128 %.3f s (%zu migrations); exponent in m %.2f",
                    last.seconds, last.migrations, exponent)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string csv_without_timing(const harness::ExperimentReport& r) {
  std::ostringstream out;
  harness::write_results_csv(out, r);
  std::istringstream in(out.str());
  std::string result;
  for (std::string l; std::getline(in, l);) result += l.substr(0, l.rfind(',')) + '\n';
  return result;
}

Outcome determinism(const std::filesystem::path& scenario) {
  auto config = harness::load_scenario(scenario);
  config.horizon = std::min(config.horizon, 90.0);
  config.warmup = std::min(config.warmup, 10.0);
  const auto base = std::filesystem::temp_directory_path() / "pcs_acceptance_determinism";
  std::filesystem::remove_all(base);
  const auto a = harness::run_experiment(config, {.parallelism = 1, .trace_dir = base / "a"});
  const auto b = harness::run_experiment(config, {.parallelism = 4, .trace_dir = base / "b"});
  bool same = csv_without_timing(a) == csv_without_timing(b);
  std::size_t files = 0, bytes = 0;
  for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
    const std::string x = slurp(e.path());
    same = same && x == slurp(base / "b" / e.path().filename());
    bytes += x.size();
    ++files;
  }
  std::filesystem::remove_all(base);
  return {same && files == a.cells.size(),
          fmt("%zu cells rerun (parallelism 1 vs 4): CSV and %zu traces (%.1f MB) identical: %s",
              a.cells.size(), files, static_cast<double>(bytes) / 1e6, same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <standard-scenario.yaml> <prediction-scenario.yaml>\n";
    return 1;
  }
  const std::filesystem::path scenario = argv[1];
  const std::filesystem::path prediction = argv[2];

  report(1, 1.0, mg1_closed_form);
  report(2, 60.0, mm1_simulation);
  report(3, 30.0, matrix_updates);
  report(4, 120.0, greedy_vs_exhaustive);
  report(5, 1.0, worked_examples);

  // Criteria 6 and 7 share one sweep; each is charged its full time.
  Sweep sweep;
  double sweep_s = 0.0;
  try {
    sweep = run_standard(scenario);
    sweep_s = sweep.seconds;
  } catch (const std::exception& e) {
    std::cerr << "standard sweep failed: " << e.what() << '\n';
  }
  const bool swept = !sweep.report.cells.empty() && sweep.report.failed() == 0;
  report(6, 300.0 - sweep_s, [&] {
    return swept ? redundancy_harm(sweep) : Outcome{false, "standard sweep did not complete"};
  });
  report(7, 600.0 - sweep_s, [&] {
    return swept ? pcs_dominance(sweep) : Outcome{false, "standard sweep did not complete"};
  });
  report(8, 600.0, [&] { return prediction_shape(prediction); });
  report(9, 600.0, scalability);
  report(10, 600.0, [&] { return determinism(scenario); });

  std::cout << (failures == 0 ? "all criteria pass" : fmt("%d criteria fail", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
