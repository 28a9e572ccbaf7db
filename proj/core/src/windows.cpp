#include "hydro/windows.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "hydro/error.hpp"

namespace hydro {

void WindowSpec::validate() const {
  if (window_hours < 1) throw InvalidArgument("window_hours must be >= 1");
  if (target_stride_hours < 1) throw InvalidArgument("target_stride_hours must be >= 1");
}

namespace {

void require_hourly(const TimeSeries& ts) {
  for (Timestamp t : ts.timestamps()) {
    if (t % kSecondsPerHour != 0) {
      throw InvalidArgument("build_dataset: " + ts.station() + " is not on the hourly grid at " +
                            format_iso8601(t));
    }
  }
}

}  // namespace

Dataset build_dataset(const TimeSeries& q, const TimeSeries& h, const TimeSeries& target,
                      const WindowSpec& spec) {
  spec.validate();
  require_hourly(q);
  require_hourly(h);
  require_hourly(target);
  const auto w = static_cast<std::size_t>(spec.window_hours);
  const Timestamp stride = static_cast<Timestamp>(spec.target_stride_hours) * kSecondsPerHour;

  Dataset ds;
  ds.window_hours = spec.window_hours;
  std::vector<double> rows;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Timestamp t = target.timestamps()[i];
    if (t % stride != 0) continue;
    const Timestamp first = t - static_cast<Timestamp>(w - 1) * kSecondsPerHour;
    const auto iq = q.find(first);
    const auto ih = h.find(first);
    const auto span_ok = [&](const TimeSeries& s, std::ptrdiff_t start) {
      if (start < 0 || static_cast<std::size_t>(start) + w > s.size()) return false;
      return s.timestamps()[static_cast<std::size_t>(start) + w - 1] == t;
    };
    // Timestamps are strictly increasing on an hourly grid, so matching both
    // window ends proves the window has no gap.
    if (!span_ok(q, iq) || !span_ok(h, ih)) {
      ++ds.excluded;
      continue;
    }
    const auto qv = q.values().subspan(static_cast<std::size_t>(iq), w);
    const auto hv = h.values().subspan(static_cast<std::size_t>(ih), w);
    rows.insert(rows.end(), qv.begin(), qv.end());
    rows.insert(rows.end(), hv.begin(), hv.end());
    ds.y.push_back(target.values()[i]);
    ds.timestamps.push_back(t);
  }
  if (ds.y.empty()) throw InvalidArgument("build_dataset: no eligible samples");
  ds.x = Matrix(ds.y.size(), 2 * w, std::move(rows));
  ds.norm = compute_norm_stats(ds.x, ds.y);
  return ds;
}

NormStats compute_norm_stats(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  if (n == 0 || y.size() != n) throw InvalidArgument("compute_norm_stats: empty or mismatched");
  NormStats s;
  s.x_mean.assign(x.cols(), 0.0);
  s.x_std.assign(x.cols(), 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) s.x_mean[c] += x(r, c);
  for (double& m : s.x_mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - s.x_mean[c];
      s.x_std[c] += d * d;
    }
  for (double& sd : s.x_std) {
    sd = std::sqrt(sd / static_cast<double>(n));
    if (sd < 1e-12) sd = 1.0;
  }
  double ym = 0.0;
  for (double v : y) ym += v;
  ym /= static_cast<double>(n);
  double yv = 0.0;
  for (double v : y) yv += (v - ym) * (v - ym);
  const double ysd = std::sqrt(yv / static_cast<double>(n));
  s.y_mean = ym;
  s.y_std = ysd < 1e-12 ? 1.0 : ysd;
  return s;
}

Dataset with_norm_stats(Dataset ds, const NormStats& stats) {
  if (stats.x_mean.size() != ds.width()) throw InvalidArgument("with_norm_stats: width mismatch");
  ds.norm = stats;
  return ds;
}

Matrix normalize_features(const Matrix& x, const NormStats& stats) {
  if (x.cols() != stats.x_mean.size()) {
    throw InvalidArgument("normalize: feature width " + std::to_string(x.cols()) +
                          " does not match statistics width " +
                          std::to_string(stats.x_mean.size()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (!std::isfinite(v)) throw InvalidArgument("normalize: non-finite input");
      out(r, c) = (v - stats.x_mean[c]) / stats.x_std[c];
    }
  return out;
}

Vector normalize_target(std::span<const double> y, const NormStats& stats) {
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - stats.y_mean) / stats.y_std;
  return out;
}

Vector denormalize_target(std::span<const double> y_norm, const NormStats& stats) {
  Vector out(y_norm.size());
  for (std::size_t i = 0; i < y_norm.size(); ++i) out[i] = y_norm[i] * stats.y_std + stats.y_mean;
  return out;
}

Dataset normalize(const Dataset& ds) {
  Dataset out = ds;
  out.x = normalize_features(ds.x, ds.norm);
  out.y = normalize_target(ds.y, ds.norm);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x = x.select_rows(indices);
  out.y.reserve(indices.size());
  out.timestamps.reserve(indices.size());
  for (std::size_t i : indices) {
    out.y.push_back(y[i]);
    out.timestamps.push_back(timestamps[i]);
  }
  out.window_hours = window_hours;
  out.norm = norm;
  return out;
}

std::vector<std::size_t> even_subsample(std::size_t n, std::size_t max_rows) {
  std::vector<std::size_t> idx;
  if (max_rows == 0 || max_rows >= n) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(max_rows);
  for (std::size_t k = 0; k < max_rows; ++k) idx.push_back(k * n / max_rows);
  return idx;
}

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const int w = ds.window_hours;
  out << "timestamp";
  for (int i = 0; i < w; ++i) out << ",q_" << i;
  for (int i = 0; i < w; ++i) out << ",h_" << i;
  out << ",target\n";
  char buf[64];
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out << ',' << std::string_view(buf, ptr - buf);
  };
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << format_iso8601(ds.timestamps[r]);
    for (double v : ds.x.row(r)) put(v);
    put(ds.y[r]);
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace hydro
