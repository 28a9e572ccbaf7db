#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "hydro/error.hpp"
#include "hydro/gbt.hpp"
#include "test_support.hpp"

namespace hydro {
namespace {

Matrix column(const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

double sse(std::span<const double> v) {
  double m = 0.0, s = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

TEST(FitTree, ConstantResidualsGiveOneLeaf) {
  const auto x = testing::random_matrix(20, 3, 1);
  const auto t = fit_tree(x, Vector(20, 2.5), 3, 1);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.predict(x.row(4)), 2.5);
}

TEST(FitTree, StaircaseSplitsAtMidpoint) {
  const auto t = fit_tree(column({0, 1, 2, 3}), Vector{0, 0, 10, 10}, 1, 1);
  ASSERT_EQ(t.nodes().size(), 3u);
  EXPECT_EQ(t.nodes()[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, 1.5);
  EXPECT_EQ(t.predict(Vector{0.7}), 0.0);
  EXPECT_EQ(t.predict(Vector{2.2}), 10.0);
  // Out-of-range inputs land on a boundary leaf.
  EXPECT_EQ(t.predict(Vector{-100.0}), 0.0);
  EXPECT_EQ(t.predict(Vector{100.0}), 10.0);
}

TEST(FitTree, IdenticalRowsShareALeaf) {
  const auto t = fit_tree(column({1.0, 1.0}), Vector{2.0, 4.0}, 3, 1);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.predict(Vector{1.0}), 3.0);
}

TEST(FitTree, DepthOneMatchesExhaustiveSearch) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 25, d = 3;
    Matrix x(n, d);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) x(r, c) = level(rng);  // ties on purpose
    const auto res = testing::random_vector(n, 100 + static_cast<std::uint64_t>(trial));
    double best = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      for (int thr2 = 1; thr2 < 12; thr2 += 2) {
        const double thr = thr2 / 2.0;
        Vector l, r;
        for (std::size_t i = 0; i < n; ++i) (x(i, c) <= thr ? l : r).push_back(res[i]);
        if (l.empty() || r.empty()) continue;
        best = std::max(best, sse(res) - sse(l) - sse(r));
      }
    }
    const auto t = fit_tree(x, res, 1, 1);
    Vector l, r;
    for (std::size_t i = 0; i < n; ++i) (t.predict(x.row(i)) == t.nodes()[1].value ? l : r).push_back(res[i]);
    ASSERT_FALSE(l.empty());
    ASSERT_FALSE(r.empty());
    EXPECT_NEAR(sse(res) - sse(l) - sse(r), best, 1e-9);
  }
}

TEST(FitTree, RespectsDepthAndMinLeaf) {
  const auto x = testing::random_matrix(200, 4, 5);
  const auto res = testing::random_vector(200, 6);
  for (int depth : {0, 1, 2, 5}) {
    const auto t = fit_tree(x, res, depth, 7);
    EXPECT_LE(t.depth(), depth);
    std::map<double, int> counts;
    for (std::size_t i = 0; i < 200; ++i) counts[t.predict(x.row(i))]++;
    for (const auto& [v, c] : counts) EXPECT_GE(c, 7);
  }
  EXPECT_THROW(fit_tree(x.select_rows(std::vector<std::size_t>{0, 1, 2}), Vector{1, 2, 3}, 2, 2),
               InvalidArgument);
}

TEST(FitTree, PredictionsStayWithinResidualRange) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto x = testing::random_matrix(40, 3, seed);
    const auto res = testing::random_vector(40, seed + 1000, 5.0);
    const auto [lo, hi] = std::minmax_element(res.begin(), res.end());
    const auto t = fit_tree(x, res, 3, 1);
    const auto probe = testing::random_matrix(20, 3, seed + 2000, 10.0);
    for (std::size_t r = 0; r < 20; ++r) {
      const double p = t.predict(probe.row(r));
      EXPECT_GE(p, *lo);
      EXPECT_LE(p, *hi);
    }
  }
}

TEST(FitGbt, ConstantTargetGivesZeroTrees) {
  const auto x = testing::random_matrix(30, 2, 1);
  const auto e = fit_gbt(x, Vector(30, 4.0), GbtConfig{});
  EXPECT_EQ(e.trees.size(), 100u);
  for (const auto& t : e.trees) {
    EXPECT_EQ(t.leaf_count(), 1u);
    EXPECT_EQ(t.nodes()[0].value, 0.0);
  }
  EXPECT_EQ(e.predict(x.row(3)), 4.0);
}

TEST(FitGbt, StaircaseInterpolates) {
  Vector xs(10), y(10);
  for (int i = 0; i < 10; ++i) xs[static_cast<std::size_t>(i)] = i, y[static_cast<std::size_t>(i)] = (i / 3) * 1.5;
  GbtConfig cfg;
  cfg.max_depth = 2;
  cfg.learning_rate = 1.0;
  cfg.n_stages = 50;
  const auto e = fit_gbt(column(xs), y, cfg);
  EXPECT_LE(e.train_mse.back(), 1e-6);
  ASSERT_EQ(e.train_mse.size(), 51u);
}

TEST(FitGbt, TrainingMseNonIncreasing) {
  const auto x = testing::random_matrix(300, 5, 9);
  Vector y(300);
  for (std::size_t r = 0; r < 300; ++r) y[r] = std::sin(2.0 * x(r, 0)) + x(r, 1) * x(r, 2);
  const auto e = fit_gbt(x, y, GbtConfig{});
  ASSERT_EQ(e.train_mse.size(), 101u);
  for (std::size_t i = 1; i < e.train_mse.size(); ++i) EXPECT_LE(e.train_mse[i], e.train_mse[i - 1]);
  EXPECT_NEAR(e.init_value, std::accumulate(y.begin(), y.end(), 0.0) / 300.0, 1e-12);
}

TEST(FitGbt, ZeroStagesPredictsTheMean) {
  GbtConfig cfg;
  cfg.n_stages = 0;
  const auto e = fit_gbt(column({1, 2, 3}), Vector{1, 2, 6}, cfg);
  EXPECT_TRUE(e.trees.empty());
  EXPECT_EQ(e.predict(Vector{50.0}), 3.0);
}

TEST(FitGbt, FlatBeyondTrainingRange) {
  Matrix x(120, 1);
  Vector y(120);
  for (std::size_t r = 0; r < 120; ++r) {
    x(r, 0) = static_cast<double>(r) / 10.0;
    y[r] = 3.0 * x(r, 0);
  }
  const double y_max = *std::max_element(y.begin(), y.end());
  const auto e = fit_gbt(x, y, GbtConfig{});
  EXPECT_EQ(e.predict(Vector{500.0}), e.predict(Vector{x(119, 0)}));
  EXPECT_EQ(e.predict(Vector{-500.0}), e.predict(Vector{0.0}));
  EXPECT_LE(e.predict(Vector{500.0}), y_max + 1e-6);
}

TEST(GbtConfig, DefaultsAndValidation) {
  const GbtConfig c;
  EXPECT_EQ(c.n_stages, 100);
  EXPECT_EQ(c.learning_rate, 0.1);
  EXPECT_EQ(c.max_depth, 3);
  EXPECT_EQ(c.min_leaf, 1);
  EXPECT_THROW(GbtConfig::from_options({{"learning_rate", "0"}}), InvalidArgument);
  EXPECT_THROW(GbtConfig::from_options({{"learning_rate", "1.5"}}), InvalidArgument);
  EXPECT_THROW(GbtConfig::from_options({{"min_leaf", "0"}}), InvalidArgument);
  EXPECT_EQ(GbtConfig::from_options({{"n_stages", "7"}}).n_stages, 7);
}

TEST(GbtRegressor, FitsWindowedData) {
  auto x = testing::random_matrix(150, 4, 12);
  Vector y(150);
  for (std::size_t r = 0; r < 150; ++r) y[r] = x(r, 0) > 0.0 ? 2.0 : -1.0;
  const auto ds = testing::make_dataset(x, y, 2);
  GbtRegressor m(GbtConfig{});
  m.fit(ds);
  const auto p = m.predict(ds.x);
  double se = 0.0;
  for (std::size_t i = 0; i < 150; ++i) se += (p[i] - y[i]) * (p[i] - y[i]);
  EXPECT_LT(se / 150.0, 0.01);
}

}  // namespace
}  // namespace hydro
