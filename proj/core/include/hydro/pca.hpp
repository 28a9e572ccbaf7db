#pragma once

#include <span>
#include <variant>

#include "hydro/numerics/matrix.hpp"

namespace hydro {

struct PcaBasis {
  Vector mean;              // d
  Matrix components;        // k × d, orthonormal rows
  Vector singular_values;   // k, descending
  double energy_fraction = 1.0;

  std::size_t input_dim() const noexcept { return mean.size(); }
  std::size_t n_components() const noexcept { return components.rows(); }
};

struct FixedComponents {
  std::size_t k;
};
struct MinEnergy {
  double fraction;
};
using PcaSelector = std::variant<FixedComponents, MinEnergy>;

/// Principal directions of the column-centered X. Throws InvalidArgument when
/// the requested k exceeds min(n, d).
PcaBasis fit_pca(const Matrix& x, const PcaSelector& selector);

/// components · (x − mean)
Vector transform(const PcaBasis& basis, std::span<const double> x);
/// mean + componentsᵀ z
Vector inverse_transform(const PcaBasis& basis, std::span<const double> z);
/// Row-wise transform of a whole matrix.
Matrix transform_rows(const PcaBasis& basis, const Matrix& x);

}  // namespace hydro
