#include "pcs/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "pcs/error.hpp"

namespace pcs::harness {
namespace {

std::string num(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

CellResult run_cell(const ScenarioConfig& config, const std::string& policy, double lambda,
                    std::uint64_t seed, const ExperimentOptions& options) {
  CellResult cell;
  cell.policy = policy;
  cell.lambda = lambda;
  cell.seed = seed;
  try {
    sim::SimulationConfig sim_config = make_simulation(config, policy, lambda, seed);
    sim_config.record_replicas = options.trace_dir.has_value();
    const sim::SimulationTrace trace = sim::run_simulation(std::move(sim_config));
    if (options.trace_dir) {
      const auto path = *options.trace_dir / trace_file_name(policy, lambda, seed);
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorCode::kBadConfig, "cannot write " + path.string());
      sim::write_trace_ndjson(out, trace);
    }
    cell.metrics = sim::compute_metrics(trace);
    cell.migrations = trace.migrations;
    cell.sched_ms = trace.scheduler_seconds * 1e3;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

std::size_t ExperimentReport::failed() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

std::string trace_file_name(const std::string& policy, double lambda, std::uint64_t seed) {
  return policy + "_" + num(lambda) + "_" + std::to_string(seed) + ".ndjson";
}

ExperimentReport run_experiment(const ScenarioConfig& config, const ExperimentOptions& options) {
  validate_scenario(config);
  struct Key {
    const std::string* policy;
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Key> keys;
  for (const auto& p : config.policies) {
    for (double l : config.arrival_rates) {
      for (std::uint64_t s : config.seeds) keys.push_back({&p, l, s});
    }
  }
  if (options.trace_dir) std::filesystem::create_directories(*options.trace_dir);

  ExperimentReport report;
  report.cells.resize(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      report.cells[i] = run_cell(config, *keys[i].policy, keys[i].lambda, keys[i].seed, options);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, keys.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return report;
}

void write_results_csv(std::ostream& out, const ExperimentReport& report) {
  out << kResultsHeader << '\n';
  for (const auto& c : report.cells) {
    out << c.policy << ',' << num(c.lambda) << ',' << c.seed << ',';
    if (c.ok) {
      out << fixed(c.metrics.max_p99 * 1e3, 6) << ',' << fixed(c.metrics.mean_overall * 1e3, 6)
          << ',' << c.metrics.migrations << ',' << (c.metrics.saturated ? 1 : 0) << ','
          << fixed(c.sched_ms, 3);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

void write_migration_log(std::ostream& out, const ExperimentReport& report) {
  out << "policy\tlambda\tseed\tinterval\tcomponent\torigin\tdestination\treduction_ms\n";
  for (const auto& c : report.cells) {
    for (const auto& m : c.migrations) {
      out << c.policy << '\t' << num(c.lambda) << '\t' << c.seed << '\t'
          << format_migration_log(m.interval, m.migration) << '\n';
    }
  }
}

void write_summary(std::ostream& out, const ExperimentReport& report) {
  std::vector<std::string> policies;
  std::vector<double> rates;
  for (const auto& c : report.cells) {
    if (std::find(policies.begin(), policies.end(), c.policy) == policies.end()) {
      policies.push_back(c.policy);
    }
    if (std::find(rates.begin(), rates.end(), c.lambda) == rates.end()) rates.push_back(c.lambda);
  }

  struct Agg {
    double p99 = 0.0, overall = 0.0, migrations = 0.0, utilization = 0.0;
    std::size_t n = 0, saturated = 0;
  };
  std::map<std::pair<std::string, double>, Agg> agg;
  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    Agg& a = agg[{c.policy, c.lambda}];
    a.p99 += c.metrics.max_p99;
    a.overall += c.metrics.mean_overall;
    a.migrations += static_cast<double>(c.metrics.migrations);
    a.utilization += c.metrics.max_utilization;
    a.saturated += c.metrics.saturated;
    ++a.n;
  }
  auto mean = [&](const std::string& p, double l, double Agg::*field) {
    const auto it = agg.find({p, l});
    if (it == agg.end() || it->second.n == 0) return std::nan("");
    return it->second.*field / static_cast<double>(it->second.n);
  };

  char line[256];
  for (double l : rates) {
    out << "lambda = " << num(l) << " req/s\n";
    std::snprintf(line, sizeof(line), "  %-10s %14s %16s %11s %9s %6s\n", "policy", "max_p99_ms",
                  "mean_overall_ms", "migrations", "max_util", "seeds");
    out << line;
    for (const auto& p : policies) {
      const auto it = agg.find({p, l});
      const std::size_t n = it == agg.end() ? 0 : it->second.n;
      const bool sat = it != agg.end() && it->second.saturated > 0;
      std::snprintf(line, sizeof(line), "  %-10s %14s %16s %11s %9s %6zu%s\n", p.c_str(),
                    fixed(mean(p, l, &Agg::p99) * 1e3, 3).c_str(),
                    fixed(mean(p, l, &Agg::overall) * 1e3, 3).c_str(),
                    fixed(mean(p, l, &Agg::migrations), 1).c_str(),
                    fixed(mean(p, l, &Agg::utilization), 3).c_str(), n, sat ? "  saturated" : "");
      out << line;
    }
    out << '\n';
  }

  if (std::find(policies.begin(), policies.end(), "pcs") != policies.end()) {
    out << "PCS reduction (mean over rates, equal weight per rate)\n";
    for (const auto& p : policies) {
      if (p == "pcs") continue;
      double p99 = 0.0, overall = 0.0;
      std::size_t n = 0;
      for (double l : rates) {
        const double a = mean(p, l, &Agg::p99), b = mean("pcs", l, &Agg::p99);
        const double c = mean(p, l, &Agg::overall), d = mean("pcs", l, &Agg::overall);
        if (!std::isfinite(a + b + c + d) || a <= 0.0 || c <= 0.0) continue;
        p99 += (a - b) / a;
        overall += (c - d) / c;
        ++n;
      }
      if (n == 0) continue;
      std::snprintf(line, sizeof(line), "  vs %-8s max_p99 %7.2f%%   mean_overall %7.2f%%\n",
                    p.c_str(), 100.0 * p99 / static_cast<double>(n),
                    100.0 * overall / static_cast<double>(n));
      out << line;
    }
    out << '\n';
  }

  if (report.failed() > 0) {
    out << "failed cells\n";
    for (const auto& c : report.cells) {
      if (!c.ok) out << "  " << c.policy << " lambda=" << num(c.lambda) << " seed=" << c.seed
                     << ": " << c.error << '\n';
    }
  }
}

void write_outputs(const std::filesystem::path& dir, const ExperimentReport& report) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kBadConfig, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("results.csv");
    write_results_csv(out, report);
  }
  {
    auto out = open("migrations.tsv");
    write_migration_log(out, report);
  }
  {
    auto out = open("summary.txt");
    write_summary(out, report);
  }
}

std::optional<PerformanceMatrix> capture_matrix(const ScenarioConfig& config,
                                                std::size_t interval) {
  validate_scenario(config);
  if (interval == 0) throw Error(ErrorCode::kValidationError, "interval is 1-based");
  sim::SimulationConfig s =
      make_simulation(config, "pcs", config.arrival_rates.front(), config.seeds.front());
  std::optional<PerformanceMatrix> captured;
  s.on_schedule = [&](std::size_t i, const PerformanceMatrix& m, const ClusterState&,
                      const ScheduleResult&) {
    if (i == interval) captured = m;
  };
  sim::Simulator simulator(std::move(s));
  simulator.run_until(config.schedule_interval * static_cast<double>(interval));
  return captured;
}

}  // namespace pcs::harness
