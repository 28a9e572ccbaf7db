#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "hydro/numerics/matrix.hpp"
#include "hydro/timeseries.hpp"
#include "hydro/windows.hpp"

namespace hydro::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hydro_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Hourly series from t0 with the given values.
inline TimeSeries hourly(const std::string& station, Quantity q, Timestamp t0,
                         const Vector& values) {
  std::vector<Timestamp> ts(values.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = t0 + static_cast<Timestamp>(i) * kSecondsPerHour;
  return TimeSeries(station, q, std::move(ts), values);
}

/// Dataset over raw rows, hourly timestamps from 0 and its own norm stats.
inline Dataset make_dataset(Matrix x, Vector y, int window_hours) {
  Dataset ds;
  ds.norm = compute_norm_stats(x, y);
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.window_hours = window_hours;
  for (std::size_t i = 0; i < ds.y.size(); ++i)
    ds.timestamps.push_back(static_cast<Timestamp>(i) * kSecondsPerHour);
  return ds;
}

}  // namespace hydro::testing
