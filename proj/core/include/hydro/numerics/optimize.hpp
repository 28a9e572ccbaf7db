#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hydro/numerics/matrix.hpp"

namespace hydro {

using Objective = std::function<double(std::span<const double>)>;

struct OptResult {
  Vector x_best;
  double f_best = 0.0;
  int n_evals = 0;
  bool converged = false;
};

/// Box constraints. Candidate points are clamped into the box before the
/// objective is evaluated.
struct Bounds {
  Vector low;
  Vector high;
};

struct NelderMeadOptions {
  int max_iter = 500;
  double x_tol = 1e-8;
  double f_tol = 1e-10;
  /// Initial simplex edge, relative to the bounds width when bounds are set.
  double initial_step = 0.1;
  std::optional<Bounds> bounds;
};

/// Downhill simplex minimization.
///
/// An objective value of +inf marks an infeasible point and is simply ranked
/// worst; NaN or -inf aborts with NumericalError. The objective must be finite
/// at x0.
OptResult nelder_mead(const Objective& f, std::span<const double> x0,
                      const NelderMeadOptions& opts = {});

struct BasinHoppingOptions {
  int n_hops = 30;
  double step_scale = 0.5;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::optional<Bounds> bounds;
  NelderMeadOptions local;
};

/// Global minimization by random perturbation + Nelder-Mead + Metropolis
/// acceptance. The perturbation is uniform in ±step_scale × (bounds width), or
/// ±step_scale per coordinate without bounds. Returns the best local minimum
/// seen; `history`, when given, receives the running best after the initial
/// minimization and after every hop.
OptResult basin_hopping(const Objective& f, std::span<const double> x0,
                        const BasinHoppingOptions& opts = {},
                        std::vector<double>* history = nullptr);

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps.
Vector finite_diff_gradient(const Objective& f, std::span<const double> x, double eps);

}  // namespace hydro
