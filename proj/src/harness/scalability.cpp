#include "pcs/harness/scalability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "pcs/error.hpp"
#include "pcs/scheduler.hpp"

namespace pcs::harness {

SyntheticCluster synthetic_cluster(std::size_t m, std::size_t k, std::uint64_t seed,
                                   std::size_t window) {
  if (m == 0 || k == 0 || window == 0) {
    throw Error(ErrorCode::kValidationError, "synthetic cluster needs m, k and window > 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<ComponentId>> stages;
  if (m < 3) {
    stages.emplace_back();
    for (ComponentId c = 0; c < m; ++c) stages[0].push_back(c);
  } else {
    stages = {{0}, {}, {static_cast<ComponentId>(m - 1)}};
    for (ComponentId c = 1; c + 1 < m; ++c) stages[1].push_back(c);
  }

  const std::size_t hot = std::max<std::size_t>(1, k / 2);
  std::vector<NodeState> nodes(k);
  for (NodeId n = 0; n < k; ++n) {
    nodes[n].id = n;
    const double level = n < hot ? 0.1 + 0.3 * unit(rng) : 0.05 * unit(rng);
    for (std::size_t s = 0; s < window; ++s) {
      const double jitter = 1.0 + 0.2 * (unit(rng) - 0.5);
      nodes[n].batch_samples.push_back(
          {level * jitter, 10.0 * level * jitter, 4e7 * level * jitter, 2e7 * level * jitter});
    }
  }
  std::vector<NodeId> placement(m);
  for (ComponentId c = 0; c < m; ++c) {
    placement[c] = static_cast<NodeId>(rng() % hot);
    const double size = 0.5 + unit(rng);
    nodes[placement[c]].per_component_contribution[c] = {0.03 * size, 0.3 * size, 1e6 * size,
                                                         1e6 * size};
  }

  CombinedModel model({ResourceRegression{Resource::kCore, 0.010, 0.020, 0.9},
                       ResourceRegression{Resource::kCache, 0.010, 0.0015, 0.7},
                       ResourceRegression{Resource::kDiskBw, 0.010, 4e-10, 0.5},
                       ResourceRegression{Resource::kNetworkBw, 0.010, 6e-10, 0.4}});
  return SyntheticCluster{ClusterState(ServiceTopology(std::move(stages), std::move(placement)),
                                       std::move(nodes)),
                          std::move(model), 20.0};
}

double fit_log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

ScalabilityReport scalability_report(const std::vector<std::size_t>& ms,
                                     const std::vector<std::size_t>& ks,
                                     const ScalabilityOptions& options) {
  ScalabilityReport report;
  SchedulerConfig config;
  config.epsilon = options.epsilon;
  for (std::size_t k : ks) {
    std::vector<double> xs, ys;
    for (std::size_t m : ms) {
      const SyntheticCluster cluster = synthetic_cluster(m, k, options.seed, options.window);
      ScalabilityPoint point{m, k, std::numeric_limits<double>::infinity(), 0};
      for (std::size_t rep = 0; rep < std::max<std::size_t>(1, options.repetitions); ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const ScheduleResult result =
            schedule(cluster.state, cluster.model, cluster.arrival_rate, config);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        point.seconds = std::min(point.seconds, dt.count());
        point.migrations = result.plan.migrations.size();
      }
      report.points.push_back(point);
      xs.push_back(static_cast<double>(m));
      ys.push_back(std::max(point.seconds, 1e-9));
    }
    report.exponent_by_k.push_back(fit_log_log_slope(xs, ys));
  }
  return report;
}

void write_scalability_table(std::ostream& out, const ScalabilityReport& report,
                             const std::vector<std::size_t>& ks) {
  char line[160];
  out << "m,k,seconds,migrations\n";
  for (const auto& p : report.points) {
    std::snprintf(line, sizeof(line), "%zu,%zu,%.6f,%zu\n", p.m, p.k, p.seconds, p.migrations);
    out << line;
  }
  out << '\n';
  for (std::size_t i = 0; i < ks.size() && i < report.exponent_by_k.size(); ++i) {
    std::snprintf(line, sizeof(line), "exponent in m at k=%zu: %.3f\n", ks[i],
                  report.exponent_by_k[i]);
    out << line;
  }
}

}  // namespace pcs::harness
