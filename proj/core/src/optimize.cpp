#include "hydro/numerics/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "hydro/error.hpp"

namespace hydro {
namespace {

void clamp_into(Vector& x, const std::optional<Bounds>& bounds) {
  if (!bounds) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], bounds->low[i], bounds->high[i]);
  }
}

void check_bounds(const std::optional<Bounds>& bounds, std::size_t dim) {
  if (!bounds) return;
  if (bounds->low.size() != dim || bounds->high.size() != dim) {
    throw InvalidArgument("bounds dimension does not match the starting point");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(bounds->low[i] < bounds->high[i])) {
      throw InvalidArgument("bounds must satisfy low < high in dimension " + std::to_string(i));
    }
  }
}

double checked_eval(const Objective& f, const Vector& x, int& n_evals) {
  ++n_evals;
  const double v = f(x);
  if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
    throw NumericalError("objective returned a non-finite value after " +
                         std::to_string(n_evals) + " evaluations");
  }
  return v;
}

}  // namespace

OptResult nelder_mead(const Objective& f, std::span<const double> x0,
                      const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidArgument("nelder_mead: empty starting point");
  check_bounds(opts.bounds, n);

  OptResult res;
  Vector start(x0.begin(), x0.end());
  clamp_into(start, opts.bounds);
  const double f0 = checked_eval(f, start, res.n_evals);
  if (!std::isfinite(f0)) throw NumericalError("nelder_mead: objective not finite at x0");

  std::vector<Vector> simplex(n + 1, start);
  Vector fv(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    double step = opts.initial_step;
    if (opts.bounds) {
      step *= opts.bounds->high[i] - opts.bounds->low[i];
      if (start[i] + step > opts.bounds->high[i]) step = -step;
    } else if (start[i] != 0.0) {
      step *= std::max(1.0, std::abs(start[i]));
    }
    simplex[i + 1][i] += step;
    clamp_into(simplex[i + 1], opts.bounds);
    fv[i + 1] = checked_eval(f, simplex[i + 1], res.n_evals);
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  std::vector<std::size_t> order(n + 1);
  Vector centroid(n), trial(n), trial2(n);

  auto point = [&](double coef, const Vector& worst, Vector& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
    clamp_into(out, opts.bounds);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(simplex[i][j] - simplex[best][j]));
      diameter = std::max(diameter, d);
    }
    const double spread = fv[worst] - fv[best];
    if (diameter < opts.x_tol || (std::isfinite(spread) && spread < opts.f_tol)) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    point(kReflect, simplex[worst], trial);
    const double fr = checked_eval(f, trial, res.n_evals);
    if (fr < fv[best]) {
      point(kExpand, simplex[worst], trial2);
      const double fe = checked_eval(f, trial2, res.n_evals);
      if (fe < fr) {
        simplex[worst] = trial2;
        fv[worst] = fe;
      } else {
        simplex[worst] = trial;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second_worst]) {
      simplex[worst] = trial;
      fv[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst, else inside.
    const bool outside = fr < fv[worst];
    point(outside ? kContract : -kContract, simplex[worst], trial2);
    const double fc = checked_eval(f, trial2, res.n_evals);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = trial2;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[best][j] + kShrink * (simplex[i][j] - simplex[best][j]);
      }
      clamp_into(simplex[i], opts.bounds);
      fv[i] = checked_eval(f, simplex[i], res.n_evals);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x_best = simplex[best];
  res.f_best = fv[best];
  return res;
}

OptResult basin_hopping(const Objective& f, std::span<const double> x0,
                        const BasinHoppingOptions& opts, std::vector<double>* history) {
  const std::size_t n = x0.size();
  check_bounds(opts.bounds, n);
  if (opts.n_hops < 0) throw InvalidArgument("basin_hopping: n_hops must be non-negative");
  if (opts.temperature < 0.0) throw InvalidArgument("basin_hopping: negative temperature");

  NelderMeadOptions local = opts.local;
  local.bounds = opts.bounds;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> accept(0.0, 1.0);

  OptResult current = nelder_mead(f, x0, local);
  OptResult best = current;
  int total_evals = current.n_evals;
  if (history) history->assign(1, best.f_best);

  Vector trial(n);
  for (int hop = 0; hop < opts.n_hops; ++hop) {
    for (std::size_t i = 0; i < n; ++i) {
      const double width = opts.bounds ? opts.bounds->high[i] - opts.bounds->low[i] : 1.0;
      trial[i] = current.x_best[i] + unit(rng) * opts.step_scale * width;
    }
    clamp_into(trial, opts.bounds);
    // Perturbed points may land where the objective is infeasible; skip the hop.
    int probe_evals = 0;
    const double probe = checked_eval(f, trial, probe_evals);
    total_evals += probe_evals;
    if (std::isfinite(probe)) {
      OptResult local_min = nelder_mead(f, trial, local);
      total_evals += local_min.n_evals;
      const double delta = local_min.f_best - current.f_best;
      bool take = delta <= 0.0;
      if (!take && opts.temperature > 0.0) take = accept(rng) < std::exp(-delta / opts.temperature);
      if (local_min.f_best < best.f_best) best = local_min;
      if (take) current = std::move(local_min);
    }
    if (history) history->push_back(best.f_best);
  }
  best.n_evals = total_evals;
  return best;
}

Vector finite_diff_gradient(const Objective& f, std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("finite_diff_gradient: eps must be positive");
  Vector g(x.size());
  Vector probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe);
    probe[i] = orig - eps;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("finite_diff_gradient: non-finite evaluation at coordinate " +
                           std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

}  // namespace hydro
