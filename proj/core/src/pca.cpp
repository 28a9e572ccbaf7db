#include "hydro/pca.hpp"

#include <string>

#include "hydro/error.hpp"
#include "hydro/numerics/linalg.hpp"

namespace hydro {

PcaBasis fit_pca(const Matrix& x, const PcaSelector& selector) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2 || d < 1) throw InvalidArgument("fit_pca: need at least 2 rows and 1 column");

  PcaBasis basis;
  basis.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) basis.mean[c] += x(r, c);
  for (double& m : basis.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) centered(r, c) = x(r, c) - basis.mean[c];

  const Svd s = svd(centered);
  const std::size_t r_max = s.singular_values.size();
  double total = 0.0;
  for (double l : s.singular_values) total += l * l;

  std::size_t k = 0;
  if (const auto* fixed = std::get_if<FixedComponents>(&selector)) {
    if (fixed->k == 0 || fixed->k > r_max) {
      throw InvalidArgument("fit_pca: k = " + std::to_string(fixed->k) +
                            " outside [1, min(n, d) = " + std::to_string(r_max) + "]");
    }
    k = fixed->k;
  } else {
    const double target = std::get<MinEnergy>(selector).fraction;
    if (!(target > 0.0 && target <= 1.0)) {
      throw InvalidArgument("fit_pca: energy fraction must lie in (0, 1]");
    }
    if (total == 0.0) {
      k = 1;
    } else {
      double acc = 0.0;
      for (k = 0; k < r_max;) {
        acc += s.singular_values[k] * s.singular_values[k];
        ++k;
        // Relative slack absorbs rounding in the cumulative sum.
        if (acc >= target * total * (1.0 - 1e-12)) break;
      }
    }
  }

  basis.components = Matrix(k, d);
  basis.singular_values.assign(s.singular_values.begin(), s.singular_values.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < d; ++c) basis.components(i, c) = s.v(c, i);
  double kept = 0.0;
  for (double l : basis.singular_values) kept += l * l;
  basis.energy_fraction = total > 0.0 ? kept / total : 1.0;
  return basis;
}

Vector transform(const PcaBasis& basis, std::span<const double> x) {
  if (x.size() != basis.input_dim()) throw InvalidArgument("pca transform: dimension mismatch");
  Vector centered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - basis.mean[i];
  return basis.components * centered;
}

Vector inverse_transform(const PcaBasis& basis, std::span<const double> z) {
  if (z.size() != basis.n_components()) {
    throw InvalidArgument("pca inverse_transform: dimension mismatch");
  }
  Vector x = basis.mean;
  for (std::size_t k = 0; k < z.size(); ++k) {
    auto comp = basis.components.row(k);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += z[k] * comp[i];
  }
  return x;
}

Matrix transform_rows(const PcaBasis& basis, const Matrix& x) {
  Matrix out(x.rows(), basis.n_components());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Vector z = transform(basis, x.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace hydro
