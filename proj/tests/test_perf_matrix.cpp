#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pcs/error.hpp"
#include "pcs/perf_matrix.hpp"

using namespace pcs;
using fixtures::ClusterSpec;

namespace {

constexpr double kMs = 1e-3;

bool windows_close(const SampleWindow& a, const SampleWindow& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.at(i), y = b.at(i);
    for (Resource r : kResources) {
      if (std::fabs(x[r] - y[r]) > 1e-9 * (1.0 + std::fabs(y[r]))) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("updated_contention follows the four migration roles") {
  const ContentionVector u{0.5, 10, 100, 1000};
  const ContentionVector u_ci{0.2, 12, 50, 0};
  const ContentionVector u_nj{0.9, 1, 2, 3};
  CHECK(updated_contention(MigrationRole::kMigrating, u, u_ci, u_nj) == u_nj);
  const auto origin = updated_contention(MigrationRole::kOnOrigin, u, u_ci, u_nj);
  CHECK(origin.core_usage == doctest::Approx(0.3));
  CHECK(origin.cache_mpki == 0.0);
  CHECK(origin.disk_bw == 50.0);
  const auto dest = updated_contention(MigrationRole::kOnDestination, u, u_ci, u_nj);
  CHECK(dest.core_usage == doctest::Approx(0.7));
  CHECK(dest.cache_mpki == 22.0);
  CHECK(updated_contention(MigrationRole::kOther, u, u_ci, u_nj) == u);
}

TEST_CASE("hotspot cluster: one migration takes overall latency from 57 ms to 39 ms") {
  const auto layout = fixtures::hotspot_cluster();
  const auto state = fixtures::make_state(layout);
  const auto model = fixtures::core_only_model();
  const auto matrix = build_matrix(state, model, 0.0);

  CHECK(matrix.baseline_overall().value() == doctest::Approx(57 * kMs).epsilon(1e-12));
  CHECK(matrix.reduction(1, 3) == doctest::Approx(18 * kMs).epsilon(1e-12));

  auto moved = state;
  moved.apply_migration(1, 3);
  CHECK(predict_placement_overall(moved, model, 0.0).value() ==
        doctest::Approx(39 * kMs).epsilon(1e-12));
  for (ComponentId i = 0; i < 4; ++i) CHECK(matrix.reduction(i, state.node_of(i)) == 0.0);
}

TEST_CASE("tie cluster: two destinations tie overall but differ for the mover") {
  const auto state = fixtures::make_state(fixtures::tie_cluster());
  const auto matrix = build_matrix(state, fixtures::core_only_model(), 0.0);
  CHECK(matrix.baseline_overall().value() == doctest::Approx(70 * kMs).epsilon(1e-12));
  CHECK(matrix.reduction(1, 0) == doctest::Approx(10 * kMs).epsilon(1e-12));
  CHECK(matrix.reduction(1, 3) == doctest::Approx(10 * kMs).epsilon(1e-12));
  CHECK(matrix.self_reduction(1, 0) == doctest::Approx(20 * kMs).epsilon(1e-12));
  CHECK(matrix.self_reduction(1, 3) == doctest::Approx(30 * kMs).epsilon(1e-12));
}

TEST_CASE("ClusterState validation") {
  auto layout = fixtures::hotspot_cluster();
  SUBCASE("ragged windows") {
    layout.batch[2].pop_back();
    CHECK_THROWS_AS(fixtures::make_state(layout), Error);
  }
  SUBCASE("component listed on the wrong node") {
    auto state = fixtures::make_state(layout);
    auto nodes = state.node_states();
    nodes[1].per_component_contribution.erase(1);
    nodes[0].per_component_contribution[1] = {};
    try {
      ClusterState bad(state.topology(), nodes);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidTopology);
    }
  }
  SUBCASE("node ids out of order") {
    auto state = fixtures::make_state(layout);
    auto nodes = state.node_states();
    std::swap(nodes[0].id, nodes[1].id);
    CHECK_THROWS_AS(ClusterState(state.topology(), nodes), Error);
  }
}

TEST_CASE("property: every matrix cell matches the from-scratch oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + rng() % 9;
    const std::size_t k = 2 + rng() % 6;
    const std::size_t stages = 1 + rng() % std::min<std::size_t>(m, 4);
    const std::size_t t = 1 + rng() % 8;
    const double load = (trial % 3 == 0) ? 0.0 : 0.2 + 0.8 * std::uniform_real_distribution<>(0, 1)(rng);
    const auto rc = fixtures::random_cluster(rng, m, k, stages, t, load);
    const auto state = fixtures::make_state(rc.layout);
    const auto matrix = build_matrix(state, rc.model, rc.arrival_rate);

    const auto base =
        fixtures::oracle_overall(rc.layout, rc.layout.placement, rc.model, rc.arrival_rate);
    CHECK(matrix.baseline_overall().is_saturated() == base.is_saturated());
    if (!base.is_saturated()) {
      CHECK(matrix.baseline_overall().value() == doctest::Approx(base.value()).epsilon(1e-12));
    }
    for (ComponentId i = 0; i < m; ++i) {
      for (NodeId j = 0; j < k; ++j) {
        const auto want =
            fixtures::oracle_cell(rc.layout, rc.layout.placement, rc.model, rc.arrival_rate, i, j);
        CAPTURE(trial);
        CAPTURE(i);
        CAPTURE(j);
        CHECK(fixtures::close(matrix.reduction(i, j), want.reduction, 1e-12));
        CHECK(fixtures::close(matrix.self_reduction(i, j), want.self_reduction, 1e-12));
      }
    }
  }
}

TEST_CASE("property: incremental migration updates equal a re-derived state") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 12;
    const std::size_t k = 2 + rng() % 6;
    const auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % 3, 1 + rng() % 6, 0.5);
    auto state = fixtures::make_state(rc.layout);
    for (int step = 0; step < 6; ++step) {
      const ComponentId c = rng() % m;
      const NodeId dest = rng() % k;
      state.apply_migration(c, dest);
      CHECK(state.node_of(c) == dest);
      const ClusterState fresh(state.topology(), state.node_states());
      for (ComponentId i = 0; i < m; ++i) {
        CHECK(windows_close(state.component_samples(i), fresh.component_samples(i)));
      }
      for (NodeId n = 0; n < k; ++n) {
        CHECK(windows_close(state.node_aggregate(n), fresh.node_aggregate(n)));
        CHECK(state.residents(n) == fresh.residents(n));
      }
    }
  }
}

TEST_CASE("property: stay-put cells are zero and the baseline matches predict_overall") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 10, k = 1 + rng() % 5;
    const auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % std::min<std::size_t>(m, 3),
                                             4, 0.7);
    const auto state = fixtures::make_state(rc.layout);
    const auto matrix = build_matrix(state, rc.model, rc.arrival_rate);
    for (ComponentId i = 0; i < m; ++i) {
      CHECK(matrix.reduction(i, state.node_of(i)) == 0.0);
      CHECK(matrix.self_reduction(i, state.node_of(i)) == 0.0);
    }
    const auto direct = predict_placement_overall(state, rc.model, rc.arrival_rate);
    CHECK(direct.is_saturated() == matrix.baseline_overall().is_saturated());
    if (!direct.is_saturated()) {
      CHECK(direct.value() == doctest::Approx(matrix.baseline_overall().value()).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: migration effects on the mover, origin, destination and others") {
  // The random model has non-negative slopes, so predictions are monotone in
  // every contention field. An extra idle node is always a strictly
  // less-contended destination.
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + rng() % 9, k = 2 + rng() % 4;
    auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % std::min<std::size_t>(m, 3),
                                       1 + rng() % 5, 0.4);
    rc.layout.batch.push_back(
        std::vector<ContentionVector>(rc.layout.batch.front().size(), ContentionVector{}));
    const auto state = fixtures::make_state(rc.layout);
    const MigrationEvaluator eval(state, rc.model, rc.arrival_rate);
    for (ComponentId i = 0; i < m; ++i) {
      const NodeId origin = state.node_of(i);
      for (NodeId j = 0; j <= k; ++j) {
        if (j == origin) continue;
        const auto after = eval.hypothetical_latencies(i, j);
        if (j == k) CHECK(after[i] <= eval.component_latency(i));
        for (ComponentId c = 0; c < m; ++c) {
          if (c == i) continue;
          const Latency before = eval.component_latency(c);
          if (state.node_of(c) == origin) {
            CHECK(after[c] <= before);
          } else if (state.node_of(c) == j) {
            CHECK(after[c] >= before);
          } else {
            CHECK(after[c] == before);
          }
        }
      }
    }
  }
}

TEST_CASE("property: entries never exceed baseline minus the lowest achievable latency") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + rng() % 9, k = 2 + rng() % 5;
    const std::size_t stages = 1 + rng() % std::min<std::size_t>(m, 3);
    const auto rc = fixtures::random_cluster(rng, m, k, stages, 1 + rng() % 5, 0.5);
    const auto state = fixtures::make_state(rc.layout);
    const auto matrix = build_matrix(state, rc.model, rc.arrival_rate);
    if (matrix.baseline_overall().is_saturated()) continue;
    // No component can be faster than the model at zero contention with no
    // service-time variance.
    const Latency floor_latency =
        mg1_latency({rc.arrival_rate, rc.model.predict(ContentionVector{}), 0.0});
    const double bound = matrix.baseline_overall().value() -
                         static_cast<double>(stages) * floor_latency.value();
    for (ComponentId i = 0; i < m; ++i) {
      for (NodeId j = 0; j < k; ++j) CHECK(matrix.reduction(i, j) <= bound + 1e-12);
    }
  }
}

TEST_CASE("property: with identical idle nodes the matrix follows a node relabelling") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + rng() % 8, k = 2 + rng() % 5;
    auto rc = fixtures::random_cluster(rng, m, k, 1 + rng() % 2, 3, 0.5);
    for (auto& w : rc.layout.batch) w.assign(w.size(), ContentionVector{});
    std::vector<NodeId> perm(k);
    for (NodeId n = 0; n < k; ++n) perm[n] = n;
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabelled = rc.layout;
    for (auto& n : relabelled.placement) n = perm[n];

    const auto a = build_matrix(fixtures::make_state(rc.layout), rc.model, rc.arrival_rate);
    const auto b = build_matrix(fixtures::make_state(relabelled), rc.model, rc.arrival_rate);
    for (ComponentId i = 0; i < m; ++i) {
      for (NodeId j = 0; j < k; ++j) {
        CHECK(fixtures::close(a.reduction(i, j), b.reduction(i, perm[j]), 1e-12));
      }
    }
  }
}

TEST_CASE("saturated moves score -inf and escaping saturation earns the credit") {
  // One component per stage; c0 sits on a hot node and is saturated at this
  // load, n1 is cold.
  ClusterSpec s;
  s.stages = {{0}, {1}};
  s.placement = {0, 1};
  s.batch = {std::vector<ContentionVector>(2, {0.9, 0, 0, 0}),
             std::vector<ContentionVector>(2, {0.0, 0, 0, 0})};
  s.contribution = {{0.05, 0, 0, 0}, {0.05, 0, 0, 0}};
  const auto state = fixtures::make_state(s);
  const auto model = fixtures::core_only_model();  // 100 ms at core 0.9
  const double lambda = 12.0;                      // rho = 1.2 on n0, 0.18 on n1
  const auto matrix = build_matrix(state, model, lambda);
  CHECK(matrix.baseline_overall().is_saturated());
  const auto cell = fixtures::oracle_cell(s, s.placement, model, lambda, 0, 1);
  CHECK(matrix.reduction(0, 1) > 1e5);
  CHECK(matrix.reduction(0, 1) == doctest::Approx(cell.reduction).epsilon(1e-12));
  // Moving c1 onto the hot node keeps the service saturated.
  CHECK(std::isinf(matrix.reduction(1, 0)));
  CHECK(matrix.reduction(1, 0) < 0.0);
}

TEST_CASE("matrix CSV dump") {
  const auto state = fixtures::make_state(fixtures::hotspot_cluster());
  const auto matrix = build_matrix(state, fixtures::core_only_model(), 0.0);
  std::ostringstream out;
  write_matrix_csv(out, matrix);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "component_id,node_id,reduction_ms,self_reduction_ms");
  std::size_t rows = 0;
  bool found = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("1,3,", 0) == 0) {
      found = true;
      CHECK(line.find("18.000000") != std::string::npos);
    }
  }
  CHECK(rows == 16);
  CHECK(found);
}
