#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "hydro/error.hpp"
#include "hydro/synthdata.hpp"
#include "test_support.hpp"

namespace hydro {
namespace {

CatchmentScenario one_year() {
  CatchmentScenario sc;
  sc.n_years = 1;
  return sc;
}

CatchmentScenario noiseless(CatchmentScenario sc) {
  sc.obs_noise_std = 0.0;
  sc.gap_rate = 0.0;
  sc.spike_rate = 0.0;
  return sc;
}

TEST(Scenario, ValidationRejectsBadFields) {
  auto sc = one_year();
  sc.rating_b = 1.5;
  EXPECT_THROW(sc.validate(), InvalidArgument);
  sc = one_year();
  sc.backwater_weight = -0.1;
  EXPECT_THROW(sc.validate(), InvalidArgument);
  sc = one_year();
  sc.storm_magnitude_scale = 0.0;
  EXPECT_THROW(sc.validate(), InvalidArgument);
  sc = one_year();
  sc.n_years = 0;
  EXPECT_THROW(generate_boundaries(sc), InvalidArgument);
}

TEST(GenerateBoundaries, LengthAndStations) {
  const auto b = generate_boundaries(one_year());
  EXPECT_EQ(b.q_ton.size(), 8760u);
  EXPECT_EQ(b.h_lar.size(), 8760u);
  EXPECT_EQ(b.q_ton.quantity(), Quantity::discharge);
  EXPECT_EQ(b.h_lar.quantity(), Quantity::stage);
  EXPECT_EQ(b.q_ton.timestamps().front(), start_of_year(1996));
}

TEST(GenerateBoundaries, NoStormsLeavesBaseAndSeason) {
  auto sc = one_year();
  sc.storm_rate = 0.0;
  const auto b = generate_boundaries(sc);
  EXPECT_EQ(b.storm_count, 0u);
  for (std::size_t h = 0; h < b.q_ton.size(); h += 97) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(h) / 8760.0;
    EXPECT_DOUBLE_EQ(b.q_ton.values()[h], sc.base_discharge + sc.seasonal_amplitude * std::cos(phase - 0.3));
  }
}

TEST(GenerateBoundaries, SameSeedBitIdentical) {
  auto sc = one_year();
  sc.seed = 77;
  const auto a = generate_boundaries(sc);
  const auto b = generate_boundaries(sc);
  EXPECT_EQ(a.q_ton, b.q_ton);
  EXPECT_EQ(a.h_lar, b.h_lar);
  sc.seed = 78;
  EXPECT_NE(generate_boundaries(sc).q_ton, a.q_ton);
}

double poisson_cdf(int k, double lambda) {
  double s = 0.0;
  for (int i = 0; i <= k; ++i) s += std::exp(i * std::log(lambda) - lambda - std::lgamma(i + 1.0));
  return s;
}

TEST(GenerateBoundaries, StormCountsFollowPoisson) {
  const double lambda = 20.0;
  int lo = 0;
  while (poisson_cdf(lo, lambda) < 0.005) ++lo;
  int hi = lo;
  while (poisson_cdf(hi, lambda) < 0.995) ++hi;
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto sc = one_year();
    sc.storm_rate = lambda;
    sc.seed = seed;
    const auto n = static_cast<int>(generate_boundaries(sc).storm_count);
    inside += (n >= lo && n <= hi);
  }
  // 99 expected; 95 leaves room for sampling noise over 100 draws.
  EXPECT_GE(inside, 95);
}

TEST(UnitHydrograph, SumsToOneWithModeAtLag) {
  for (double lag : {1.0, 6.0, 10.0, 17.5}) {
    const auto k = unit_hydrograph(lag);
    EXPECT_EQ(k.size(), static_cast<std::size_t>(std::lround(4.0 * lag)));
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
    for (double v : k) EXPECT_GE(v, 0.0);
  }
  const auto k = unit_hydrograph(10.0);
  EXPECT_EQ(std::max_element(k.begin(), k.end()) - k.begin(), 10);
  EXPECT_THROW(unit_hydrograph(0.5), InvalidArgument);
}

TEST(RouteToTarget, ConstantInputsGiveRatingCurveLevel) {
  const auto sc = one_year();
  const Timestamp t0 = start_of_year(1996);
  const auto q = testing::hourly("q", Quantity::discharge, t0, Vector(200, 400.0));
  const auto h = testing::hourly("h", Quantity::stage, t0, Vector(200, 3.0));
  const auto out = route_to_target(q, h, sc, TargetMode::physical);
  ASSERT_FALSE(out.empty());
  for (double v : out.values()) EXPECT_NEAR(v, sc.rating_a * std::pow(400.0, sc.rating_b), 1e-12);
}

TEST(RouteToTarget, PhysicalModeIsDaily) {
  const auto sc = one_year();
  const auto b = generate_boundaries(sc);
  const auto out = route_to_target(b.q_ton, b.h_lar, sc, TargetMode::physical);
  EXPECT_EQ(out.size(), 365u);
  for (auto t : out.timestamps()) EXPECT_EQ(t % 86400, 0);
}

TEST(RouteToTarget, NoiselessObservedMatchesPhysicalHourly) {
  const auto sc = noiseless(one_year());
  const auto b = generate_boundaries(sc);
  const auto phys = route_to_target(b.q_ton, b.h_lar, sc, TargetMode::physical);
  const auto obs = route_to_target(b.q_ton, b.h_lar, sc, TargetMode::observed);
  ASSERT_EQ(obs.size(), b.q_ton.size());
  for (std::size_t i = 0; i < phys.size(); ++i) {
    const auto j = obs.find(phys.timestamps()[i]);
    ASSERT_GE(j, 0);
    EXPECT_EQ(obs.values()[static_cast<std::size_t>(j)], phys.values()[i]);
  }
}

TEST(RouteToTarget, ObservedModeHasGapsAndNoise) {
  const auto sc = one_year();
  const auto b = generate_boundaries(sc);
  const auto obs = route_to_target(b.q_ton, b.h_lar, sc, TargetMode::observed);
  EXPECT_LT(obs.size(), b.q_ton.size());
  EXPECT_EQ(obs, route_to_target(b.q_ton, b.h_lar, sc, TargetMode::observed));
}

TEST(RouteToTarget, StepResponseIsLagged) {
  auto sc = noiseless(one_year());
  sc.backwater_weight = 0.0;
  const std::size_t n = 300, step = 100;
  Vector qv(n, 200.0);
  for (std::size_t i = step; i < n; ++i) qv[i] = 1200.0;
  const Timestamp t0 = start_of_year(1996);
  const auto q = testing::hourly("q", Quantity::discharge, t0, qv);
  const auto h = testing::hourly("h", Quantity::stage, t0, Vector(n, 2.0));
  const auto out = route_to_target(q, h, sc, TargetMode::observed);
  const double before = sc.rating_a * std::pow(200.0, sc.rating_b);
  const double after = sc.rating_a * std::pow(1200.0, sc.rating_b);
  std::size_t reached = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.values()[i] >= before + 0.95 * (after - before)) {
      reached = i;
      break;
    }
  }
  ASSERT_LT(reached, n);
  EXPECT_GE(static_cast<double>(reached - step), sc.lag_hours);
}

TEST(RouteToTarget, MonotoneInDischarge) {
  const auto sc = one_year();
  const auto b = generate_boundaries(sc);
  Vector bigger(b.q_ton.values().begin(), b.q_ton.values().end());
  for (std::size_t i = 0; i < bigger.size(); ++i) bigger[i] += 50.0 + static_cast<double>(i % 7);
  const TimeSeries q2("tonneins", Quantity::discharge,
                      {b.q_ton.timestamps().begin(), b.q_ton.timestamps().end()}, bigger);
  const auto lo = route_to_target(b.q_ton, b.h_lar, sc, TargetMode::physical);
  const auto hi = route_to_target(q2, b.h_lar, sc, TargetMode::physical);
  for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_GE(hi.values()[i], lo.values()[i]);
}

TEST(RouteToTarget, RejectsMisalignedInputs) {
  const auto sc = one_year();
  const Timestamp t0 = start_of_year(1996);
  const auto q = testing::hourly("q", Quantity::discharge, t0, Vector(50, 300.0));
  const auto h = testing::hourly("h", Quantity::stage, t0 + kSecondsPerHour, Vector(50, 2.0));
  EXPECT_THROW(route_to_target(q, h, sc, TargetMode::physical), InvalidArgument);
}

}  // namespace
}  // namespace hydro
