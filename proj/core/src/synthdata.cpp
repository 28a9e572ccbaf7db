#include "hydro/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "hydro/error.hpp"

namespace hydro {
namespace {

constexpr double kHoursPerYear = 8760.0;

// Independent stream per purpose so that switching one process off leaves the
// others untouched.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t { kStorms = 1, kLowFreq = 2, kNoise = 3, kGaps = 4, kSpikes = 5 };

std::vector<double> poisson_arrivals(std::mt19937_64& rng, double rate_per_year, double horizon) {
  std::vector<double> out;
  if (rate_per_year <= 0.0) return out;
  std::exponential_distribution<double> gap(rate_per_year / kHoursPerYear);
  for (double t = gap(rng); t < horizon; t += gap(rng)) out.push_back(t);
  return out;
}

void add_pulse(std::vector<double>& q, double start, double magnitude, double rise,
               double recession) {
  const auto first = static_cast<std::size_t>(std::ceil(std::max(start, 0.0)));
  const double horizon = start + 12.0 * recession + 6.0 * rise;
  for (std::size_t h = first; h < q.size() && static_cast<double>(h) < horizon; ++h) {
    const double dt = static_cast<double>(h) - start;
    q[h] += magnitude * (1.0 - std::exp(-dt / rise)) * std::exp(-dt / recession);
  }
}

std::vector<Timestamp> hourly_grid(Timestamp t0, std::size_t n) {
  std::vector<Timestamp> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t0 + static_cast<Timestamp>(i) * kSecondsPerHour;
  return t;
}

}  // namespace

void CatchmentScenario::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("scenario: ") + what);
  };
  require(n_years > 0, "n_years must be positive");
  require(base_discharge > 0.0, "base_discharge must be positive");
  require(seasonal_amplitude >= 0.0 && seasonal_amplitude < base_discharge,
          "seasonal_amplitude must lie in [0, base_discharge)");
  require(storm_rate >= 0.0, "storm_rate must be non-negative");
  require(storm_magnitude_shape > 0.0 && storm_magnitude_scale > 0.0,
          "storm magnitude gamma parameters must be positive");
  require(storm_rise_hours > 0.0, "storm_rise_hours must be positive");
  require(recession_hours > 0.0, "recession_hours must be positive");
  require(lag_hours >= 1.0, "lag_hours must be at least 1");
  require(rating_a > 0.0, "rating_a must be positive");
  require(rating_b > 0.0 && rating_b <= 1.0, "rating_b must lie in (0, 1]");
  require(backwater_weight >= 0.0 && backwater_weight <= 1.0,
          "backwater_weight must lie in [0, 1]");
  require(lar_lag_hours >= 0.0, "lar_lag_hours must be non-negative");
  require(lar_rating_a > 0.0, "lar_rating_a must be positive");
  require(lar_rating_b > 0.0 && lar_rating_b <= 1.0, "lar_rating_b must lie in (0, 1]");
  require(lar_lowfreq_amplitude >= 0.0, "lar_lowfreq_amplitude must be non-negative");
  require(obs_noise_std >= 0.0, "obs_noise_std must be non-negative");
  require(ar1_coefficient >= 0.0 && ar1_coefficient < 1.0, "ar1_coefficient must lie in [0, 1)");
  require(gap_rate >= 0.0 && spike_rate >= 0.0, "gap_rate and spike_rate must be non-negative");
  require(gap_mean_hours > 0.0, "gap_mean_hours must be positive");
  require(spike_magnitude >= 0.0, "spike_magnitude must be non-negative");
  require(extreme_event_day < 0.0 || extreme_event_magnitude > 0.0,
          "extreme_event_magnitude must be positive when an extreme event is set");
}

Boundaries generate_boundaries(const CatchmentScenario& sc) {
  sc.validate();
  const std::size_t n = sc.n_hours();
  const Timestamp t0 = start_of_year(sc.start_year);

  // Seasonal cycle peaking in mid-winter.
  std::vector<double> q(n);
  for (std::size_t h = 0; h < n; ++h) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(h) / kHoursPerYear;
    q[h] = sc.base_discharge + sc.seasonal_amplitude * std::cos(phase - 0.3);
  }

  auto storm_rng = stream(sc.seed, kStorms);
  const auto arrivals = poisson_arrivals(storm_rng, sc.storm_rate, static_cast<double>(n));
  std::gamma_distribution<double> magnitude(sc.storm_magnitude_shape, sc.storm_magnitude_scale);
  for (double start : arrivals) {
    add_pulse(q, start, magnitude(storm_rng), sc.storm_rise_hours, sc.recession_hours);
  }
  if (sc.extreme_event_day >= 0.0) {
    add_pulse(q, sc.extreme_event_day * 24.0, sc.extreme_event_magnitude, sc.storm_rise_hours,
              sc.recession_hours);
  }

  // Lagged, 24 h trailing-mean discharge feeding the downstream rating curve.
  const auto lag = static_cast<std::ptrdiff_t>(std::lround(sc.lar_lag_hours));
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t h = 0; h < n; ++h) prefix[h + 1] = prefix[h] + q[h];
  auto lagged_mean_q = [&](std::ptrdiff_t h) {
    const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(h - lag, 0, static_cast<std::ptrdiff_t>(n) - 1);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(hi - 23, 0);
    return (prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)]) /
           static_cast<double>(hi - lo + 1);
  };

  auto lf_rng = stream(sc.seed, kLowFreq);
  std::uniform_real_distribution<double> period_days(15.0, 90.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Wave {
    double period_h, phase;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 3; ++i) waves.push_back({period_days(lf_rng) * 24.0, phase(lf_rng)});

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lf = 0.0;
    for (const auto& w : waves) {
      lf += std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / w.period_h + w.phase);
    }
    h[i] = sc.lar_rating_a * std::pow(lagged_mean_q(static_cast<std::ptrdiff_t>(i)), sc.lar_rating_b) +
           sc.lar_lowfreq_amplitude * lf / 3.0;
  }

  const auto grid = hourly_grid(t0, n);
  return {TimeSeries("tonneins", Quantity::discharge, grid, std::move(q)),
          TimeSeries("la_reole", Quantity::stage, grid, std::move(h)), arrivals.size()};
}

std::vector<double> unit_hydrograph(double lag_hours) {
  if (!(lag_hours >= 1.0)) throw InvalidArgument("unit_hydrograph: lag must be >= 1 hour");
  // Gamma(shape 3, scale lag/2) density has its mode at lag.
  const auto len = static_cast<std::size_t>(std::lround(4.0 * lag_hours));
  const double theta = lag_hours / 2.0;
  std::vector<double> k(len);
  for (std::size_t j = 0; j < len; ++j) {
    const double x = static_cast<double>(j);
    k[j] = x * x * std::exp(-x / theta);
  }
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= total;
  return k;
}

TimeSeries route_to_target(const TimeSeries& q_ton, const TimeSeries& h_lar,
                           const CatchmentScenario& sc, TargetMode mode) {
  sc.validate();
  const auto tq = q_ton.timestamps();
  if (q_ton.size() != h_lar.size() || !std::equal(tq.begin(), tq.end(), h_lar.timestamps().begin())) {
    throw InvalidArgument("route_to_target: q_ton and h_lar are not aligned");
  }
  const std::size_t n = q_ton.size();
  if (n == 0) throw InvalidArgument("route_to_target: empty inputs");
  for (std::size_t i = 1; i < n; ++i) {
    if (tq[i] - tq[i - 1] != kSecondsPerHour) {
      throw InvalidArgument("route_to_target: inputs must be gap-free hourly series");
    }
  }

  const auto kernel = unit_hydrograph(sc.lag_hours);
  const auto q = q_ton.values();
  const auto hl = h_lar.values();
  const double h_mean = std::accumulate(hl.begin(), hl.end(), 0.0) / static_cast<double>(n);

  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    double routed = 0.0;
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      routed += kernel[j] * q[i >= j ? i - j : 0];
    }
    target[i] = sc.rating_a * std::pow(routed, sc.rating_b) + sc.backwater_weight * (hl[i] - h_mean);
  }

  std::string station = mode == TargetMode::physical ? "marmande_sim" : "marmande_obs";
  if (mode == TargetMode::physical) {
    std::vector<Timestamp> t;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      if (tq[i] % 86400 != 0) continue;
      t.push_back(tq[i]);
      v.push_back(target[i]);
    }
    return TimeSeries(std::move(station), Quantity::stage, std::move(t), std::move(v));
  }

  if (sc.obs_noise_std > 0.0) {
    auto rng = stream(sc.seed, kNoise);
    const double phi = sc.ar1_coefficient;
    std::normal_distribution<double> innov(0.0, sc.obs_noise_std * std::sqrt(1.0 - phi * phi));
    std::normal_distribution<double> stationary(0.0, sc.obs_noise_std);
    double e = stationary(rng);
    for (std::size_t i = 0; i < n; ++i) {
      target[i] += e;
      e = phi * e + innov(rng);
    }
  }

  if (sc.spike_rate > 0.0 && sc.spike_magnitude > 0.0) {
    auto rng = stream(sc.seed, kSpikes);
    std::bernoulli_distribution sign(0.5);
    for (double at : poisson_arrivals(rng, sc.spike_rate, static_cast<double>(n))) {
      const auto i = static_cast<std::size_t>(at);
      target[i] += sign(rng) ? sc.spike_magnitude : -sc.spike_magnitude;
    }
  }

  std::vector<bool> keep(n, true);
  if (sc.gap_rate > 0.0) {
    auto rng = stream(sc.seed, kGaps);
    std::exponential_distribution<double> length(1.0 / sc.gap_mean_hours);
    for (double at : poisson_arrivals(rng, sc.gap_rate, static_cast<double>(n))) {
      const auto first = static_cast<std::size_t>(at);
      const auto len = 1 + static_cast<std::size_t>(length(rng));
      for (std::size_t i = first; i < std::min(n, first + len); ++i) keep[i] = false;
    }
  }

  std::vector<Timestamp> t;
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    t.push_back(tq[i]);
    v.push_back(target[i]);
  }
  return TimeSeries(std::move(station), Quantity::stage, std::move(t), std::move(v));
}

}  // namespace hydro
