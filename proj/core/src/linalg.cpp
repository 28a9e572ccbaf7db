#include "hydro/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydro/error.hpp"

namespace hydro {

CholeskyFactor::CholeskyFactor(const Matrix& a) : l_(a.rows(), a.cols()) {
  if (a.rows() != a.cols()) throw InvalidArgument("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    auto lj = l_.row(j);
    double d = a(j, j) - dot(lj.first(j), lj.first(j));
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(j);
    const double ljj = std::sqrt(d);
    lj[j] = ljj;
    log_det_ += 2.0 * std::log(ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      auto li = l_.row(i);
      li[j] = (a(i, j) - dot(li.first(j), lj.first(j))) / ljj;
    }
  }
}

Vector CholeskyFactor::solve_lower(std::span<const double> b) const {
  const std::size_t n = size();
  if (b.size() != n) throw InvalidArgument("cholesky solve: size mismatch");
  Vector z(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto li = l_.row(i);
    z[i] = (z[i] - dot(li.first(i), std::span<const double>(z).first(i))) / li[i];
  }
  return z;
}

Vector CholeskyFactor::solve(std::span<const double> b) const {
  Vector z = solve_lower(b);
  const std::size_t n = size();
  for (std::size_t ii = n; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * z[k];
    z[ii] = s / l_(ii, ii);
  }
  return z;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  if (b.rows() != size()) throw InvalidArgument("cholesky solve: size mismatch");
  Matrix x(b.rows(), b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    Vector xc = solve(b.col(c));
    for (std::size_t r = 0; r < b.rows(); ++r) x(r, c) = xc[r];
  }
  return x;
}

CholeskySolution cholesky_solve(const Matrix& a, const Matrix& b) {
  CholeskyFactor f(a);
  return {f.solve(b), f.log_det()};
}

namespace {

// Completes the columns of `u` flagged in `missing` into an orthonormal set
// by Gram-Schmidt against the standard basis.
void complete_orthonormal(Matrix& u, const std::vector<bool>& missing) {
  const std::size_t n = u.rows();
  const std::size_t r = u.cols();
  std::size_t next_basis = 0;
  for (std::size_t c = 0; c < r; ++c) {
    if (!missing[c]) continue;
    for (; next_basis < n; ++next_basis) {
      Vector cand(n, 0.0);
      cand[next_basis] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < r; ++o) {
          if (o == c || (missing[o] && o > c)) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < n; ++i) proj += u(i, o) * cand[i];
          for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * u(i, o);
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 1e-6) {
        for (std::size_t i = 0; i < n; ++i) u(i, c) = cand[i] / nrm;
        ++next_basis;
        break;
      }
    }
  }
}

// Jacobi on the columns of a tall matrix (rows >= cols).
Svd jacobi_tall(const Matrix& x, const SvdOptions& opts) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  // Column-major working copies for contiguous column access.
  std::vector<double> a(m * n);
  std::vector<double> v(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) a[j * m + i] = x(i, j);
    v[j * n + j] = 1.0;
  }
  auto col = [&](std::vector<double>& buf, std::size_t rows, std::size_t j) {
    return std::span<double>(buf.data() + j * rows, rows);
  };

  bool converged = n < 2;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto ap = col(a, m, p);
        auto aq = col(a, m, q);
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (gamma == 0.0 || std::abs(gamma) <= opts.tolerance * std::sqrt(alpha * beta)) {
          continue;
        }
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = ap[i];
          const double xq = aq[i];
          ap[i] = c * xp - s * xq;
          aq[i] = s * xp + c * xq;
        }
        auto vp = col(v, n, p);
        auto vq = col(v, n, q);
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = vp[i];
          const double xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
    }
  }
  if (!converged) throw NumericalError("svd: Jacobi sweeps did not converge");

  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(col(a, m, j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sv[i] > sv[j]; });

  Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
  const double smax = n > 0 ? sv[order[0]] : 0.0;
  const double zero_tol = std::max(smax, 1.0) * 1e-13 * static_cast<double>(std::max(m, n));
  std::vector<bool> missing(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double s = sv[j];
    out.singular_values[k] = s;
    auto aj = col(a, m, j);
    if (s > zero_tol) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = aj[i] / s;
    } else {
      missing[k] = true;
      out.singular_values[k] = s;
    }
    auto vj = col(v, n, j);
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vj[i];
  }
  complete_orthonormal(out.u, missing);
  return out;
}

}  // namespace

Svd svd(const Matrix& x, const SvdOptions& opts) {
  if (x.empty()) throw InvalidArgument("svd: empty matrix");
  if (x.rows() >= x.cols()) return jacobi_tall(x, opts);
  Svd t = jacobi_tall(x.transpose(), opts);
  return {std::move(t.v), std::move(t.singular_values), std::move(t.u)};
}

Vector least_squares(const Matrix& a, std::span<const double> y) {
  if (a.rows() != y.size()) throw InvalidArgument("least_squares: row count mismatch");
  if (a.rows() < a.cols()) throw InvalidArgument("least_squares: fewer rows than columns");
  const std::size_t n = a.cols();
  Matrix ata(n, n);
  Vector aty(n, 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = ar[i];
      aty[i] += ai * y[r];
      for (std::size_t j = 0; j <= i; ++j) ata(i, j) += ai * ar[j];
    }
  }
  double mean_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_diag += ata(i, i);
  mean_diag /= static_cast<double>(n);
  const double jitter = 1e-10 * std::max(mean_diag, 1e-300);
  for (std::size_t i = 0; i < n; ++i) {
    ata(i, i) += jitter;
    for (std::size_t j = 0; j < i; ++j) ata(j, i) = ata(i, j);
  }
  try {
    return CholeskyFactor(ata).solve(aty);
  } catch (const NotPositiveDefinite& e) {
    throw NumericalError("least_squares: design matrix is rank deficient (pivot " +
                         std::to_string(e.pivot()) + ")");
  }
}

}  // namespace hydro
