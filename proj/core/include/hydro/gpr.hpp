#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hydro/model.hpp"
#include "hydro/numerics/linalg.hpp"
#include "hydro/numerics/optimize.hpp"
#include "hydro/pca.hpp"

namespace hydro {

/// Matérn-3/2 hyperparameters, all in natural-log space.
struct GprHyperparams {
  Vector log_length_scales;   // one per input dimension (ARD)
  double log_signal_std = 0;  // σ_x
  double log_nugget_std = -3; // σ_n

  std::size_t dim() const noexcept { return log_length_scales.size(); }
  double signal_variance() const;
  double nugget_variance() const;

  /// [log l_1, ..., log l_d, log σ_x, log σ_n]
  Vector pack() const;
  static GprHyperparams unpack(std::span<const double> packed);
};

/// Search box in log space.
struct GprBounds {
  double log_length_low = -4.0, log_length_high = 4.0;
  double log_signal_low = -4.0, log_signal_high = 4.0;
  double log_nugget_low = -8.0, log_nugget_high = 1.0;

  Bounds packed(std::size_t dim) const;
};

/// σ_x² (1 + √3 r) exp(−√3 r), r = ‖(z − z′) / l‖.
double matern32(std::span<const double> z, std::span<const double> z2, const GprHyperparams& hyper);

/// Kernel matrix K over the rows of `z` (no nugget).
Matrix kernel_matrix(const Matrix& z, const GprHyperparams& hyper);

/// −½ yᵀ(K + σ_n² I)⁻¹ y − ½ log det(K + σ_n² I) − (n/2) log 2π.
/// A failed factorization yields −inf.
double log_marginal_likelihood(const GprHyperparams& hyper, const Matrix& z,
                               std::span<const double> y_centered);

struct GprPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct GprSearchOptions {
  GprBounds bounds;
  int n_hops = 30;
  double step_scale = 0.5;
  double temperature = 1.0;
  int local_max_iter = 400;
  std::uint64_t seed = 0;
};

struct GprFitTrace {
  double initial_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
  /// Best log-likelihood after the first local search and after every hop.
  std::vector<double> best_history;
  int n_evals = 0;
};

/// Exact GP on already-reduced inputs.
class GaussianProcess {
 public:
  GaussianProcess() = default;

  /// Conditions on (z, y) with fixed hyperparameters.
  static GaussianProcess condition(Matrix z, Vector y, const GprHyperparams& hyper);

  /// Maximizes the log marginal likelihood by basin hopping from `start`
  /// (a data-driven default when empty), then conditions.
  static GaussianProcess fit(Matrix z, Vector y, const GprSearchOptions& opts,
                             std::optional<GprHyperparams> start = std::nullopt,
                             GprFitTrace* trace = nullptr);

  /// Data-driven starting point: per-dimension std of z, std of y, 10% nugget.
  static GprHyperparams default_start(const Matrix& z, std::span<const double> y,
                                      const GprBounds& bounds);

  GprPrediction predict(std::span<const double> z_star) const;

  const Matrix& inputs() const noexcept { return z_; }
  const Vector& targets() const noexcept { return y_; }
  const Vector& alpha() const noexcept { return alpha_; }
  const Matrix& cholesky_lower() const noexcept { return chol_->lower(); }
  const GprHyperparams& hyperparams() const noexcept { return hyper_; }
  double y_mean() const noexcept { return y_mean_; }

  /// Restores a conditioned process from stored parts (used by deserialization).
  static GaussianProcess restore(Matrix z, Vector y, const GprHyperparams& hyper);

 private:
  Matrix z_;
  Vector y_;
  GprHyperparams hyper_;
  double y_mean_ = 0.0;
  Vector alpha_;
  std::shared_ptr<const CholeskyFactor> chol_;
};

struct GprConfig {
  PcaSelector pca = MinEnergy{0.99};
  /// When non-empty, k is chosen from this list on a chronological 80/20
  /// hold-out of the training set.
  std::vector<std::size_t> pca_grid;
  /// Training rows (evenly spaced) used by the likelihood search; 0 keeps all.
  std::size_t max_train_samples = 400;
  /// Training rows (evenly spaced) the final process is conditioned on, with
  /// the searched hyperparameters; 0 keeps all.
  std::size_t max_condition_samples = 2000;
  GprSearchOptions search;

  static GprConfig from_options(const ModelOptions& options, std::uint64_t seed);
};

/// GP regression on PCA-reduced discharge and stage blocks.
class GprRegressor final : public Regressor {
 public:
  explicit GprRegressor(GprConfig config) : config_(std::move(config)) {}

  std::string family() const override { return "gpr"; }
  void fit(const Dataset& train) override;
  Vector predict(const Matrix& x) const override;
  HyperParams hyperparams() const override;
  std::string serialize() const override;

  /// Mean (m) and variance (m²) for one raw feature row of width 2W.
  GprPrediction predict_one(std::span<const double> x) const;
  std::vector<GprPrediction> predict_with_variance(const Matrix& x) const;

  const PcaBasis& discharge_basis() const noexcept { return q_basis_; }
  const PcaBasis& stage_basis() const noexcept { return h_basis_; }
  const GaussianProcess& process() const noexcept { return gp_; }
  const GprFitTrace& trace() const noexcept { return trace_; }

  static std::unique_ptr<GprRegressor> from_json_text(std::string_view text);

 private:
  Vector reduce(std::span<const double> x_normalized) const;
  void fit_with_selector(const Dataset& train, const PcaSelector& selector);

  GprConfig config_;
  NormStats norm_;
  std::size_t window_ = 0;
  PcaBasis q_basis_;
  PcaBasis h_basis_;
  GaussianProcess gp_;
  GprFitTrace trace_;
};

}  // namespace hydro
