#pragma once

#include <cstdint>
#include <vector>

#include "hydro/timeseries.hpp"

namespace hydro {

/// Parameters of the synthetic catchment standing in for the physical model
/// and the gauge network. Discharges in m³/s, stages in m, durations in hours.
struct CatchmentScenario {
  std::uint64_t seed = 1;
  int start_year = 1996;
  int n_years = 5;

  double base_discharge = 250.0;
  double seasonal_amplitude = 150.0;
  double storm_rate = 8.0;  // events / year
  double storm_magnitude_shape = 2.0;
  double storm_magnitude_scale = 700.0;
  double storm_rise_hours = 18.0;
  double recession_hours = 60.0;
  double lag_hours = 10.0;

  double rating_a = 0.3;
  double rating_b = 0.45;
  double backwater_weight = 0.35;

  // Downstream boundary: rating transform of a lagged, smoothed discharge
  // plus an independent low-frequency oscillation.
  double lar_lag_hours = 20.0;
  double lar_rating_a = 0.45;
  double lar_rating_b = 0.35;
  double lar_lowfreq_amplitude = 0.4;

  double obs_noise_std = 0.04;
  double ar1_coefficient = 0.95;
  double gap_rate = 6.0;  // gaps / year
  double gap_mean_hours = 8.0;
  double spike_rate = 4.0;  // spikes / year
  double spike_magnitude = 1.5;

  // Optional injected flood: a storm of the given magnitude starting on the
  // given day (counted from the first day of start_year). Disabled when < 0.
  double extreme_event_day = -1.0;
  double extreme_event_magnitude = 0.0;

  /// Throws InvalidArgument on a violated constraint.
  void validate() const;
  std::size_t n_hours() const { return static_cast<std::size_t>(n_years) * 8760; }
};

struct Boundaries {
  TimeSeries q_ton;
  TimeSeries h_lar;
  std::size_t storm_count = 0;
};

/// Hourly upstream discharge and downstream stage, deterministic in the seed.
Boundaries generate_boundaries(const CatchmentScenario& scenario);

enum class TargetMode { physical, observed };

/// Discretized gamma-shaped unit hydrograph of length 4 × lag_hours whose
/// mode sits at lag_hours. Sums to one.
std::vector<double> unit_hydrograph(double lag_hours);

/// Target stage: rating curve of the routed discharge plus a backwater term.
/// Physical mode is smooth and subsampled to 00:00 UTC daily; observed mode
/// is hourly with AR(1) noise, gaps and spikes.
TimeSeries route_to_target(const TimeSeries& q_ton, const TimeSeries& h_lar,
                           const CatchmentScenario& scenario, TargetMode mode);

}  // namespace hydro
