#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "pcs/error.hpp"
#include "pcs/queueing.hpp"

using namespace pcs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected pcs::Error");
  return ErrorCode::kBadConfig;
}

}  // namespace

TEST_CASE("mg1_latency examples") {
  SUBCASE("idle queue is the mean service time") {
    CHECK(mg1_latency({0.0, 0.010, 0.0}).value() == doctest::Approx(0.010).epsilon(1e-14));
  }
  SUBCASE("exponential service reproduces M/M/1 1/(mu - lambda)") {
    // rho = 0.5, C^2 = 1 -> 20 ms.
    const auto l = mg1_latency({50.0, 0.010, 1e-4});
    CHECK(l.value() == doctest::Approx(0.020).epsilon(1e-12));
  }
  SUBCASE("deterministic service halves the queueing term") {
    CHECK(mg1_latency({50.0, 0.010, 0.0}).value() == doctest::Approx(0.015).epsilon(1e-12));
  }
  SUBCASE("rho at or above one is saturated") {
    CHECK(mg1_latency({100.0, 0.010, 1e-4}).is_saturated());
    CHECK(mg1_latency({150.0, 0.010, 0.0}).is_saturated());
  }
  SUBCASE("invalid inputs") {
    CHECK(code_of([] { mg1_latency({-1.0, 0.01, 0.0}); }) == ErrorCode::kInvalidLoad);
    CHECK(code_of([] { mg1_latency({1.0, 0.0, 0.0}); }) == ErrorCode::kInvalidLoad);
    CHECK(code_of([] { mg1_latency({1.0, 0.01, -1e-6}); }) == ErrorCode::kInvalidLoad);
    CHECK(code_of([] { mg1_latency({NAN, 0.01, 0.0}); }) == ErrorCode::kInvalidLoad);
  }
}

TEST_CASE("property: M/G/1 latency is monotone in load, variance and mean") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = 0.001 + unit(rng) * 0.05;
    const double var = unit(rng) * x * x * 3;
    const double lam = unit(rng) * 0.95 / x;
    const auto base = mg1_latency({lam, x, var});
    REQUIRE_FALSE(base.is_saturated());
    CHECK(base.value() >= x);
    const double lam2 = lam + unit(rng) * (0.999 / x - lam);
    CHECK(mg1_latency({lam2, x, var}) >= base);
    CHECK(mg1_latency({lam, x, var * (1.0 + unit(rng))}) >= base);
    const double x2 = x * (1.0 + 0.5 * unit(rng));
    if (lam * x2 < 1.0) CHECK(mg1_latency({lam, x2, var}) >= base);
  }
}

TEST_CASE("latency composition") {
  const Latency a = Latency::seconds(0.020), b = Latency::seconds(0.035);
  const Latency c = Latency::seconds(0.010), sat = Latency::saturated();

  SUBCASE("stage is the slowest component") {
    const Latency stage[] = {a, b, c};
    CHECK(stage_latency(stage).value() == 0.035);
  }
  SUBCASE("overall is the sum of stages") {
    const Latency stages[] = {Latency::seconds(0.010), Latency::seconds(0.035),
                              Latency::seconds(0.005)};
    CHECK(overall_latency(stages).value() == doctest::Approx(0.050));
  }
  SUBCASE("saturation absorbs") {
    const Latency stage[] = {a, sat};
    CHECK(stage_latency(stage).is_saturated());
    const Latency stages[] = {a, sat, b};
    CHECK(overall_latency(stages).is_saturated());
    CHECK(sat > Latency::seconds(1e300));
  }
  SUBCASE("empty inputs") {
    CHECK(code_of([] { stage_latency({}); }) == ErrorCode::kEmptyStage);
    CHECK(code_of([] { overall_latency({}); }) == ErrorCode::kEmptyTopology);
  }
}

TEST_CASE("property: composition is monotone in every component latency") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ServiceTopology topo({{0}, {1, 2, 3}, {4, 5}}, {0, 0, 1, 2, 3, 3});
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Latency> l(6);
    for (auto& v : l) v = Latency::seconds(unit(rng) * 0.05);
    const auto base = overall_from_component_latencies(topo, l);
    auto bumped = l;
    const auto c = rng() % 6;
    bumped[c] = Latency::seconds(l[c].value() + unit(rng) * 0.01);
    CHECK(overall_from_component_latencies(topo, bumped) >= base);
    bumped[c] = Latency::saturated();
    CHECK(overall_from_component_latencies(topo, bumped).is_saturated());
  }
}

TEST_CASE("ServiceTopology validation and predict_overall") {
  CHECK(code_of([] { ServiceTopology({{0}, {}}, {0}); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] { ServiceTopology({{0, 0}}, {0}); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] { ServiceTopology({{0}, {2}}, {0, 0}); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] { ServiceTopology({{0}, {1}}, {0}); }) == ErrorCode::kInvalidTopology);

  ServiceTopology topo({{0}, {1, 2}}, {0, 1, 1});
  CHECK(topo.stage_of(2) == 1);
  std::map<ComponentId, ComponentLoad> loads = {
      {0, {0.0, 0.010, 0.0}}, {1, {0.0, 0.020, 0.0}}, {2, {50.0, 0.010, 1e-4}}};
  // 10 + max(20, 20) ms.
  CHECK(predict_overall(topo, loads).value() == doctest::Approx(0.030));

  loads.erase(1);
  try {
    predict_overall(topo, loads);
    FAIL("expected MissingLoad");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingLoad);
    CHECK(std::string(e.what()).find('1') != std::string::npos);
  }
  topo.move(2, 0);
  CHECK(topo.node_of(2) == 0);
}

TEST_CASE("property: stage max is permutation-invariant and both folds match a brute-force loop") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Latency> l(1 + rng() % 9);
    for (auto& v : l) v = Latency::seconds(unit(rng) * 0.1);
    double worst = 0.0, total = 0.0;
    for (const auto& v : l) {
      worst = std::max(worst, v.value());
      total += v.value();
    }
    CHECK(stage_latency(l).value() == worst);
    CHECK(overall_latency(l).value() == total);
    std::shuffle(l.begin(), l.end(), rng);
    CHECK(stage_latency(l).value() == worst);
  }
}
