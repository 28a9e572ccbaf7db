#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hydro/numerics/matrix.hpp"

namespace hydro {

/// Mean of squared errors (pred − true). Throws on empty or mismatched input.
double mse(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

/// 1 − mse_model / mse_reg. Throws InvalidArgument when mse_reg is not positive.
double fer(double mse_model, double mse_reg);

struct MaxError {
  double value = 0.0;
  /// First index attaining the maximum.
  std::size_t index = 0;
};

MaxError max_error(std::span<const double> y_true, std::span<const double> y_pred);

/// pred − true, element-wise.
Vector errors(std::span<const double> y_true, std::span<const double> y_pred);

struct ErrorPdf {
  /// n_bins + 1 ascending edges.
  Vector edges;
  std::vector<std::size_t> counts;
  /// Fitted Gaussian density at each bin center (zero when std is zero).
  Vector gaussian;
  double bias = 0.0;
  /// Unbiased sample standard deviation.
  double std = 0.0;

  Vector centers() const;
  /// Counts scaled to a density (count / (n · bin width)).
  Vector density() const;
};

/// Equal-width histogram over [min, max]. A zero-width range gives one bin.
ErrorPdf error_pdf(std::span<const double> errors, std::size_t n_bins = 40);

struct EvalReport {
  std::string task;
  std::string model_name;
  double mse = 0.0;
  double rmse = 0.0;
  double fer = 0.0;
  double max_error = 0.0;
  std::size_t max_error_index = 0;
  double bias = 0.0;
  double error_std = 0.0;
  ErrorPdf histogram;
  std::size_t n_samples = 0;
};

/// Report of one model's predictions against the targets, with FER taken
/// against `mse_reg`.
EvalReport evaluate_predictions(std::string task, std::string model_name,
                                std::span<const double> y_true, std::span<const double> y_pred,
                                double mse_reg, std::size_t n_bins = 40);

/// task,model,n_samples,mse_m2,rmse_m,fer,max_error_m,max_error_index,bias_m,error_std_m
std::string metrics_csv_header();
std::string metrics_csv_row(const EvalReport& r);

/// Human-readable block.
void write_report_text(std::ostream& out, const EvalReport& r);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace hydro
