#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hydro {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerHour = 3600;

enum class Quantity { discharge, stage };

/// "discharge" / "stage".
std::string to_string(Quantity q);
/// CSV unit tag of the quantity: "m3s" for discharge, "m" for stage.
std::string unit_of(Quantity q);
Quantity parse_quantity(const std::string& s);

/// Parses "YYYY-MM-DDTHH:MM[:SS][Z]" as UTC.
Timestamp parse_iso8601(const std::string& s);
/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);
int year_of(Timestamp t);
Timestamp start_of_year(int year);

/// Timestamped hydraulic measurements. Gaps are absent timestamps; every
/// stored value is finite and timestamps are strictly increasing.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// Validates the invariants; throws InvalidArgument on violation.
  TimeSeries(std::string station, Quantity quantity, std::vector<Timestamp> timestamps,
             std::vector<double> values);

  const std::string& station() const noexcept { return station_; }
  Quantity quantity() const noexcept { return quantity_; }
  std::span<const Timestamp> timestamps() const noexcept { return timestamps_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  /// Index of the sample at `t`, or -1.
  std::ptrdiff_t find(Timestamp t) const noexcept;

  bool operator==(const TimeSeries&) const = default;

 private:
  std::string station_;
  Quantity quantity_ = Quantity::stage;
  std::vector<Timestamp> timestamps_;
  std::vector<double> values_;
};

/// Reads the `# station=<id> quantity=<q> unit=<u>` header and
/// `timestamp,value` rows. Rows with an empty value become gaps.
TimeSeries load_csv(const std::filesystem::path& path);
void save_csv(const TimeSeries& ts, const std::filesystem::path& path);

/// Linear interpolation onto the exact hourly grid spanning `ts`. Grid points
/// enclosed by an observation gap longer than `max_gap_hours` stay absent.
/// Observations already on the grid are copied unchanged.
TimeSeries resample_hourly(const TimeSeries& ts, int max_gap_hours);

struct SpikeCleaning {
  TimeSeries series;
  std::size_t removed = 0;
};

/// Running median / MAD outlier filter. A point is dropped when
/// |v - median| > k * max(MAD, mad_floor) over a window of `window`
/// neighbouring samples (shifted inwards at the series ends).
SpikeCleaning clean_spikes(const TimeSeries& ts, int window = 5, double k = 5.0,
                           double mad_floor = 1e-6);

/// Inclusive calendar-year ranges for training and testing.
struct SplitSpec {
  int train_start = 0;
  int train_end = 0;
  int test_start = 0;
  int test_end = 0;

  void validate() const;
};

/// Partition by the UTC calendar year of each timestamp. Points outside both
/// ranges are dropped.
std::pair<TimeSeries, TimeSeries> split_by_period(const TimeSeries& ts, const SplitSpec& spec);

}  // namespace hydro
