#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hydro/error.hpp"
#include "hydro/numerics/linalg.hpp"
#include "hydro/numerics/optimize.hpp"
#include "test_support.hpp"

namespace hydro {
namespace {

using testing::random_matrix;

Matrix spd(std::size_t n, std::uint64_t seed) {
  const auto g = random_matrix(n, n, seed);
  auto a = g.transpose() * g;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

TEST(MatrixType, RejectsNonFiniteAndBadShapes) {
  EXPECT_THROW(Matrix(2, 2, Vector{1, 2, 3}), InvalidArgument);
  EXPECT_THROW(Matrix(1, 2, Vector{1, std::numeric_limits<double>::infinity()}), InvalidArgument);
  const Matrix m{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(m.transpose()(1, 2), 6.0);
  EXPECT_EQ((m.transpose() * m)(0, 0), 35.0);
}

TEST(Cholesky, IdentitySolve) {
  const auto b = random_matrix(4, 3, 1);
  const auto sol = cholesky_solve(Matrix::identity(4), b);
  EXPECT_EQ(sol.x, b);
  EXPECT_EQ(sol.log_det, 0.0);
}

TEST(Cholesky, TwoByTwoHandInverse) {
  const Matrix a{{4, 2}, {2, 3}};
  const auto sol = cholesky_solve(a, Matrix{{2}, {1}});
  EXPECT_NEAR(sol.x(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(sol.x(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(sol.log_det, std::log(8.0), 1e-14);
}

TEST(Cholesky, IndefiniteReportsPivot) {
  try {
    CholeskyFactor f(Matrix{{1, 2}, {2, 1}});
    FAIL();
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 1u);
  }
}

TEST(Cholesky, InverseTimesMatrixIsIdentity) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = spd(12, seed);
    const auto inv = cholesky_solve(a, Matrix::identity(12)).x;
    EXPECT_LT(max_abs_diff(inv * a, Matrix::identity(12)), 1e-8);
  }
}

TEST(Cholesky, ResidualBound) {
  const auto a = spd(30, 11);
  const auto b = random_matrix(30, 4, 12);
  const auto x = cholesky_solve(a, b).x;
  EXPECT_LE(frobenius_norm(a * x - b), 1e-8 * frobenius_norm(b));
  const CholeskyFactor f(a);
  const auto l = f.lower();
  EXPECT_LT(max_abs_diff(l * l.transpose(), a), 1e-10);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = i + 1; j < 30; ++j) EXPECT_EQ(l(i, j), 0.0);
}

void check_svd(const Matrix& x) {
  const auto s = svd(x);
  const std::size_t r = std::min(x.rows(), x.cols());
  ASSERT_EQ(s.singular_values.size(), r);
  Matrix us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < r; ++j) us(i, j) *= s.singular_values[j];
  EXPECT_LE(frobenius_norm(us * s.v.transpose() - x), 1e-8 * frobenius_norm(x));
  EXPECT_LT(max_abs_diff(s.u.transpose() * s.u, Matrix::identity(r)), 1e-8);
  EXPECT_LT(max_abs_diff(s.v.transpose() * s.v, Matrix::identity(r)), 1e-8);
  for (std::size_t j = 0; j < r; ++j) {
    EXPECT_GE(s.singular_values[j], 0.0);
    if (j > 0) {
      EXPECT_LE(s.singular_values[j], s.singular_values[j - 1]);
    }
  }
}

TEST(Svd, Identity) {
  const auto s = svd(Matrix::identity(3));
  for (double v : s.singular_values) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Svd, RankOne) {
  const Vector u{0.6, 0.8, 0.0}, v{0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
  Matrix x(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = 5.0 * u[i] * v[j];
  const auto s = svd(x);
  EXPECT_NEAR(s.singular_values[0], 5.0, 1e-12);
  for (std::size_t j = 1; j < 3; ++j) EXPECT_NEAR(s.singular_values[j], 0.0, 1e-12);
}

TEST(Svd, RandomFiveByThreeReconstructs) {
  const auto x = random_matrix(5, 3, 42);
  const auto s = svd(x);
  Matrix us = s.u;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) us(i, j) *= s.singular_values[j];
  EXPECT_LE(frobenius_norm(us * s.v.transpose() - x), 1e-10);
}

TEST(Svd, SeededShapesUpTo500x48) {
  check_svd(random_matrix(500, 48, 3));
  check_svd(random_matrix(48, 500, 4));
  check_svd(random_matrix(7, 7, 5, 1e3));
  check_svd(Matrix(4, 3, 0.0));
}

TEST(Svd, InvariantUnderRowPermutation) {
  const auto x = random_matrix(20, 6, 17);
  std::vector<std::size_t> perm(20);
  for (std::size_t i = 0; i < 20; ++i) perm[i] = (i * 7) % 20;
  const auto a = svd(x).singular_values;
  const auto b = svd(x.select_rows(perm)).singular_values;
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-10);
}

TEST(LeastSquares, IdentityAndAffine) {
  const Vector y{3.0, -1.0, 2.5};
  const auto c = least_squares(Matrix::identity(3), y);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c[i], y[i], 1e-9);

  Matrix a(10, 2);
  Vector t(10);
  for (std::size_t i = 0; i < 10; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = static_cast<double>(i);
    t[i] = 2.0 * static_cast<double>(i) + 1.0;
  }
  const auto k = least_squares(a, t);
  EXPECT_NEAR(k[0], 1.0, 1e-8);
  EXPECT_NEAR(k[1], 2.0, 1e-8);
}

TEST(LeastSquares, ResidualOrthogonalToColumns) {
  const auto a = random_matrix(80, 5, 21);
  const auto y = testing::random_vector(80, 22);
  const auto c = least_squares(a, y);
  auto r = a * c;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  for (double v : a.transpose() * r) EXPECT_LT(std::abs(v), 1e-6);
  EXPECT_THROW(least_squares(random_matrix(2, 3, 1), Vector{1, 2}), InvalidArgument);
}

TEST(NelderMead, Bowl) {
  const Objective f = [](std::span<const double> x) { return dot(x, x); };
  const auto r = nelder_mead(f, Vector{3.0, -4.0});
  EXPECT_LT(norm2(r.x_best), 1e-4);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.f_best, f(r.x_best));
}

TEST(NelderMead, ConstantConvergesImmediately) {
  const auto r = nelder_mead([](std::span<const double>) { return 7.0; }, Vector{1.0, 2.0});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.f_best, 7.0);
  EXPECT_LE(r.n_evals, 10);
}

TEST(NelderMead, Rosenbrock) {
  const Objective f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions o;
  o.max_iter = 2000;
  const auto r = nelder_mead(f, Vector{-1.2, 1.0}, o);
  EXPECT_LT(r.f_best, 1e-3);
}

TEST(NelderMead, InfeasibleRankedWorstAndNanAborts) {
  const Objective walled = [](std::span<const double> x) {
    return x[0] < 0.5 ? std::numeric_limits<double>::infinity() : (x[0] - 1.0) * (x[0] - 1.0);
  };
  EXPECT_NEAR(nelder_mead(walled, Vector{2.0}).x_best[0], 1.0, 1e-4);
  const Objective bad = [](std::span<const double> x) { return x[0] > 1.5 ? std::nan("") : -x[0]; };
  EXPECT_THROW(nelder_mead(bad, Vector{1.0}), NumericalError);
  EXPECT_THROW(nelder_mead(walled, Vector{0.0}), NumericalError);
}

TEST(NelderMead, BoundsAreRespected) {
  NelderMeadOptions o;
  o.bounds = Bounds{{-1.0, -1.0}, {1.0, 1.0}};
  const Objective f = [](std::span<const double> x) {
    EXPECT_GE(x[0], -1.0);
    EXPECT_LE(x[0], 1.0);
    return (x[0] - 5.0) * (x[0] - 5.0) + x[1] * x[1];
  };
  EXPECT_NEAR(nelder_mead(f, Vector{0.0, 0.5}, o).x_best[0], 1.0, 1e-6);
}

TEST(BasinHopping, UnimodalMatchesLocalSearch) {
  const Objective f = [](std::span<const double> x) { return dot(x, x); };
  BasinHoppingOptions o;
  o.n_hops = 5;
  const auto bh = basin_hopping(f, Vector{2.0, 1.0}, o);
  const auto nm = nelder_mead(f, Vector{2.0, 1.0});
  EXPECT_NEAR(bh.f_best, nm.f_best, 1e-6);
}

double double_well(std::span<const double> x) {
  return std::pow(x[0] * x[0] - 1.0, 2) + 0.3 * x[0];
}

TEST(BasinHopping, DoubleWellFindsGlobalMinimum) {
  double grid_x = 0.0, grid_f = 1e300;
  for (int i = -30000; i <= 30000; ++i) {
    const double x = i * 1e-4;
    const double fx = double_well(std::span<const double>(&x, 1));
    if (fx < grid_f) grid_f = fx, grid_x = x;
  }
  ASSERT_LT(grid_x, -0.9);

  const auto local = nelder_mead(double_well, Vector{1.2});
  EXPECT_GT(local.x_best[0], 0.0);  // a plain local search stays in the right well

  BasinHoppingOptions o;
  o.n_hops = 20;
  o.seed = 3;
  o.bounds = Bounds{{-3.0}, {3.0}};
  const auto r = basin_hopping(double_well, Vector{1.2}, o);
  EXPECT_NEAR(r.x_best[0], grid_x, 1e-3);
  EXPECT_NEAR(r.f_best, grid_f, 1e-6);
}

TEST(BasinHopping, ZeroHopsIsOneLocalSearch) {
  BasinHoppingOptions o;
  o.n_hops = 0;
  std::vector<double> history;
  const auto r = basin_hopping(double_well, Vector{1.2}, o, &history);
  const auto nm = nelder_mead(double_well, Vector{1.2}, o.local);
  EXPECT_EQ(history.size(), 1u);
  EXPECT_EQ(r.f_best, nm.f_best);
  EXPECT_EQ(r.x_best, nm.x_best);
}

TEST(BasinHopping, HistoryMonotoneAndSeedDeterministic) {
  const Objective rastrigin = [](std::span<const double> x) {
    double s = 20.0;
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * M_PI * v);
    return s;
  };
  BasinHoppingOptions o;
  o.n_hops = 25;
  o.seed = 99;
  o.bounds = Bounds{{-5.0, -5.0}, {5.0, 5.0}};
  std::vector<double> h1, h2;
  const auto a = basin_hopping(rastrigin, Vector{3.3, -2.7}, o, &h1);
  const auto b = basin_hopping(rastrigin, Vector{3.3, -2.7}, o, &h2);
  EXPECT_EQ(a.x_best, b.x_best);
  EXPECT_EQ(h1, h2);
  ASSERT_EQ(h1.size(), 26u);
  for (std::size_t i = 1; i < h1.size(); ++i) EXPECT_LE(h1[i], h1[i - 1]);
  EXPECT_LE(a.f_best, h1.front());
}

TEST(FiniteDiff, KnownDerivatives) {
  const Objective sq = [](std::span<const double> x) { return dot(x, x); };
  const auto g = finite_diff_gradient(sq, Vector{1.0, 2.0}, 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
  const auto z = finite_diff_gradient([](std::span<const double>) { return 3.0; }, Vector{1, 2, 3}, 1e-5);
  for (double v : z) EXPECT_EQ(v, 0.0);
  const auto s = finite_diff_gradient([](std::span<const double> x) { return std::sin(x[0]); },
                                      Vector{0.3}, 1e-5);
  EXPECT_NEAR(s[0], std::cos(0.3), 1e-9);
  EXPECT_THROW(finite_diff_gradient(sq, Vector{1.0}, 0.0), InvalidArgument);
}

}  // namespace
}  // namespace hydro
