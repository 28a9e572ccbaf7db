#pragma once

#include <span>

#include "hydro/numerics/matrix.hpp"

namespace hydro {

/// Lower-triangular Cholesky factor L of an SPD matrix A = L Lᵀ.
class CholeskyFactor {
 public:
  /// Factorizes `a`. Only the lower triangle is read.
  /// Throws NotPositiveDefinite with the failing pivot index.
  explicit CholeskyFactor(const Matrix& a);

  const Matrix& lower() const noexcept { return l_; }
  std::size_t size() const noexcept { return l_.rows(); }

  /// log det A = 2 Σ log L_ii.
  double log_det() const noexcept { return log_det_; }

  Vector solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;
  /// Forward substitution only: returns L⁻¹ b.
  Vector solve_lower(std::span<const double> b) const;

 private:
  Matrix l_;
  double log_det_ = 0.0;
};

struct CholeskySolution {
  Matrix x;
  double log_det = 0.0;
};

/// Solves A X = B for SPD A.
CholeskySolution cholesky_solve(const Matrix& a, const Matrix& b);

/// Thin SVD X = U diag(s) Vᵀ with r = min(rows, cols) singular values in
/// descending order. U is rows × r, V is cols × r, both with orthonormal columns.
struct Svd {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

struct SvdOptions {
  int max_sweeps = 60;
  double tolerance = 1e-15;
};

/// One-sided Jacobi SVD. Throws NumericalError when the sweeps do not converge.
Svd svd(const Matrix& x, const SvdOptions& opts = {});

/// Minimizes ‖A c − y‖₂ through the normal equations with a 1e-10 ridge on the
/// diagonal (scaled by the mean diagonal of AᵀA). Throws NumericalError when
/// AᵀA is singular beyond that jitter.
Vector least_squares(const Matrix& a, std::span<const double> y);

}  // namespace hydro
