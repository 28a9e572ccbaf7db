#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hydro/error.hpp"
#include "hydro/numerics/linalg.hpp"
#include "hydro/pca.hpp"
#include "test_support.hpp"

namespace hydro {
namespace {

using testing::random_matrix;

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

TEST(FitPca, IdenticalRowsGiveZeroVariance) {
  Matrix x(6, 3);
  for (std::size_t r = 0; r < 6; ++r) x.row(r)[0] = 1.0, x.row(r)[1] = -2.0, x.row(r)[2] = 0.5;
  const auto b = fit_pca(x, MinEnergy{0.99});
  ASSERT_EQ(b.n_components(), 1u);
  EXPECT_EQ(b.singular_values[0], 0.0);
  EXPECT_NEAR(norm2(b.components.row(0)), 1.0, 1e-12);
  EXPECT_EQ(transform(b, x.row(3))[0], 0.0);
}

TEST(FitPca, PointCloudAlongDiagonal) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> big(0.0, 3.0), tiny(0.0, 1e-4);
  Matrix x(400, 2);
  for (std::size_t r = 0; r < 400; ++r) {
    const double t = big(rng);
    x(r, 0) = 2.0 + t / std::sqrt(2.0) + tiny(rng);
    x(r, 1) = -1.0 + t / std::sqrt(2.0) + tiny(rng);
  }
  const auto b = fit_pca(x, FixedComponents{1});
  EXPECT_NEAR(std::abs(b.components(0, 0)), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(std::abs(b.components(0, 1)), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_GT(b.components(0, 0) * b.components(0, 1), 0.0);
  EXPECT_GT(b.energy_fraction, 0.999);
}

TEST(FitPca, FullEnergyKeepsAllDirections) {
  const auto x = random_matrix(30, 6, 8);
  EXPECT_EQ(fit_pca(x, MinEnergy{1.0}).n_components(), 6u);
  EXPECT_EQ(fit_pca(random_matrix(4, 9, 8), MinEnergy{1.0}).n_components(), 3u);
}

TEST(FitPca, Errors) {
  const auto x = random_matrix(5, 3, 1);
  EXPECT_THROW(fit_pca(x, FixedComponents{4}), InvalidArgument);
  EXPECT_THROW(fit_pca(x, FixedComponents{0}), InvalidArgument);
  EXPECT_THROW(fit_pca(x, MinEnergy{0.0}), InvalidArgument);
  EXPECT_THROW(fit_pca(random_matrix(1, 3, 1), MinEnergy{0.9}), InvalidArgument);
  const auto b = fit_pca(x, FixedComponents{2});
  EXPECT_THROW(transform(b, Vector{1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(inverse_transform(b, Vector{1.0}), InvalidArgument);
}

TEST(FitPca, BasisInvariants) {
  const auto x = random_matrix(120, 10, 13);
  const auto b = fit_pca(x, FixedComponents{4});
  const auto g = b.components * b.components.transpose();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g(i, j), i == j ? 1.0 : 0.0, 1e-8);
  const auto all = fit_pca(x, MinEnergy{1.0});
  double total = 0.0, kept = 0.0;
  for (std::size_t i = 0; i < all.singular_values.size(); ++i) {
    total += all.singular_values[i] * all.singular_values[i];
    if (i < 4) kept += all.singular_values[i] * all.singular_values[i];
  }
  EXPECT_NEAR(b.energy_fraction, kept / total, 1e-12);
  for (std::size_t c = 0; c < 10; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < 120; ++r) m += x(r, c);
    EXPECT_NEAR(b.mean[c], m / 120.0, 1e-14);
  }
}

TEST(Transform, MeanMapsToOrigin) {
  const auto b = fit_pca(random_matrix(40, 5, 2), FixedComponents{3});
  for (double z : transform(b, b.mean)) EXPECT_NEAR(z, 0.0, 1e-14);
}

TEST(Transform, InSubspaceRoundTripIsExact) {
  const auto b = fit_pca(random_matrix(60, 8, 3), FixedComponents{3});
  const Vector z{0.7, -1.3, 2.2};
  Vector x = b.mean;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 8; ++c) x[c] += z[i] * b.components(i, c);
  const auto back = inverse_transform(b, transform(b, x));
  for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(back[c], x[c], 1e-10);
}

TEST(Transform, RoundTripErrorIsDistanceToSubspace) {
  const auto b = fit_pca(random_matrix(60, 8, 4), FixedComponents{3});
  const auto x = testing::random_vector(8, 77, 2.0);
  const auto back = inverse_transform(b, transform(b, x));
  // Oracle: least-squares residual of (x − mean) on the component directions.
  Vector centered(8);
  for (std::size_t c = 0; c < 8; ++c) centered[c] = x[c] - b.mean[c];
  const auto ct = b.components.transpose();
  const auto coef = least_squares(ct, centered);
  const auto fitted = ct * coef;
  EXPECT_NEAR(dist(x, back), dist(centered, fitted), 1e-8);
}

TEST(Transform, TrainingScoresHaveZeroMean) {
  const auto x = random_matrix(200, 12, 5, 4.0);
  const auto b = fit_pca(x, MinEnergy{0.9});
  const auto z = transform_rows(b, x);
  for (std::size_t k = 0; k < z.cols(); ++k) {
    double m = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) m += z(r, k);
    EXPECT_NEAR(m / 200.0, 0.0, 1e-8);
  }
}

TEST(Transform, ReconstructionErrorNonIncreasingInK) {
  const auto x = random_matrix(50, 7, 6);
  std::vector<PcaBasis> bases;
  for (std::size_t k = 1; k <= 7; ++k) bases.push_back(fit_pca(x, FixedComponents{k}));
  for (std::size_t r = 0; r < 50; ++r) {
    double prev = 1e300;
    for (const auto& b : bases) {
      const double e = dist(x.row(r), inverse_transform(b, transform(b, x.row(r))));
      EXPECT_LE(e, prev + 1e-12);
      prev = e;
    }
    EXPECT_LT(prev, 1e-10);
  }
}

}  // namespace
}  // namespace hydro
