#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "hydro/numerics/matrix.hpp"
#include "hydro/timeseries.hpp"

namespace hydro {

struct WindowSpec {
  int window_hours = 24;
  int target_stride_hours = 24;

  void validate() const;
};

/// Z-score parameters. Columns whose std falls below 1e-12 are stored with
/// std = 1 so they pass through unscaled.
struct NormStats {
  Vector x_mean;
  Vector x_std;
  double y_mean = 0.0;
  double y_std = 1.0;

  bool operator==(const NormStats&) const = default;
};

/// Windowed regression table. Row i holds the W hourly discharges (oldest
/// first) followed by the W hourly stages ending at timestamps[i].
struct Dataset {
  Matrix x;
  Vector y;
  std::vector<Timestamp> timestamps;
  int window_hours = 0;
  NormStats norm;
  std::size_t excluded = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t width() const noexcept { return x.cols(); }
  /// Columns [0, W) are the discharge block, [W, 2W) the stage block.
  std::size_t discharge_block_begin() const noexcept { return 0; }
  std::size_t stage_block_begin() const noexcept { return static_cast<std::size_t>(window_hours); }

  /// Rows at `indices`, sharing this dataset's normalization.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// One row per target timestamp on the stride grid whose W-hour window ending
/// at (and including) that timestamp is gap-free in both inputs. Normalization
/// statistics are computed from the returned rows.
Dataset build_dataset(const TimeSeries& q, const TimeSeries& h, const TimeSeries& target,
                      const WindowSpec& spec);

NormStats compute_norm_stats(const Matrix& x, std::span<const double> y);

/// Same samples with `stats` replacing the dataset's own statistics. Use it to
/// carry training statistics over to a test set.
Dataset with_norm_stats(Dataset ds, const NormStats& stats);

Matrix normalize_features(const Matrix& x, const NormStats& stats);
Vector normalize_target(std::span<const double> y, const NormStats& stats);
Vector denormalize_target(std::span<const double> y_norm, const NormStats& stats);

/// Dataset with normalized X (and y) under its own stats.
Dataset normalize(const Dataset& ds);

/// Evenly spaced subset of at most `max_rows` rows (all rows when 0 or larger
/// than the dataset).
std::vector<std::size_t> even_subsample(std::size_t n, std::size_t max_rows);

/// timestamp, q_0..q_{W-1}, h_0..h_{W-1}, target
void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace hydro
