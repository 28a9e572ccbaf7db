#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hydro/metrics.hpp"
#include "hydro/svg.hpp"
#include "hydro/timeseries.hpp"

namespace hydro {

/// Test targets and every model's predictions for one task.
struct PredictionTable {
  std::vector<Timestamp> timestamps;
  Vector target;
  std::vector<std::string> models;
  /// predictions[m][i] belongs to models[m] at timestamps[i].
  std::vector<Vector> predictions;
};

/// timestamp,target,<model>... with ISO-8601 timestamps.
void write_predictions_csv(const PredictionTable& table, const std::filesystem::path& path);
PredictionTable read_predictions_csv(const std::filesystem::path& path);

void write_metrics_csv(std::span<const EvalReport> reports, const std::filesystem::path& path);
/// Reads the scalar columns back (histograms are not stored).
std::vector<EvalReport> read_metrics_csv(const std::filesystem::path& path);

/// Vertical bars from a zero line; bar rects carry class="bar".
svg::Document bar_chart(const std::string& title, std::span<const std::string> labels,
                        std::span<const double> values, int digits = 2);

/// FER (left) and RMSE in cm (right) per model.
svg::Document fer_rmse_chart(const std::string& title, std::span<const EvalReport> reports);
/// Maximum absolute error in cm per model.
svg::Document max_error_chart(const std::string& title, std::span<const EvalReport> reports);
/// Prediction minus target in cm over time, one line per model.
svg::Document error_series_chart(const std::string& title, const PredictionTable& table);
/// Error histograms (density) with the fitted Gaussian, one panel per model.
svg::Document error_pdf_chart(const std::string& title, const PredictionTable& table,
                              std::size_t n_bins = 40);

}  // namespace hydro
