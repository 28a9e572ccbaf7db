#include "hydro/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hydro/error.hpp"

namespace hydro {

namespace chr = std::chrono;

std::string to_string(Quantity q) { return q == Quantity::discharge ? "discharge" : "stage"; }

std::string unit_of(Quantity q) { return q == Quantity::discharge ? "m3s" : "m"; }

Quantity parse_quantity(const std::string& s) {
  if (s == "discharge") return Quantity::discharge;
  if (s == "stage") return Quantity::stage;
  throw InvalidArgument("unknown quantity '" + s + "'");
}

namespace {

int parse_int(std::string_view s, const std::string& whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("malformed timestamp '" + whole + "'");
  }
  return v;
}

}  // namespace

Timestamp parse_iso8601(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.back() == 'Z') v.remove_suffix(1);
  if (v.size() != 16 && v.size() != 19) throw InvalidArgument("malformed timestamp '" + s + "'");
  if (v[4] != '-' || v[7] != '-' || (v[10] != 'T' && v[10] != ' ') || v[13] != ':' ||
      (v.size() == 19 && v[16] != ':')) {
    throw InvalidArgument("malformed timestamp '" + s + "'");
  }
  const int y = parse_int(v.substr(0, 4), s);
  const int mo = parse_int(v.substr(5, 2), s);
  const int d = parse_int(v.substr(8, 2), s);
  const int h = parse_int(v.substr(11, 2), s);
  const int mi = parse_int(v.substr(14, 2), s);
  const int se = v.size() == 19 ? parse_int(v.substr(17, 2), s) : 0;
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 59) {
    throw InvalidArgument("invalid date/time '" + s + "'");
  }
  const auto days = chr::sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_iso8601(Timestamp t) {
  const auto days = static_cast<int>(std::floor(static_cast<double>(t) / 86400.0));
  const Timestamp secs = t - static_cast<Timestamp>(days) * 86400;
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>((secs % 3600) / 60),
                static_cast<int>(secs % 60));
  return buf;
}

int year_of(Timestamp t) {
  const auto days = static_cast<int>(std::floor(static_cast<double>(t) / 86400.0));
  return static_cast<int>(chr::year_month_day{chr::sys_days{chr::days{days}}}.year());
}

Timestamp start_of_year(int year) {
  const chr::sys_days d = chr::year{year} / 1 / 1;
  return static_cast<Timestamp>(d.time_since_epoch().count()) * 86400;
}

TimeSeries::TimeSeries(std::string station, Quantity quantity, std::vector<Timestamp> timestamps,
                       std::vector<double> values)
    : station_(std::move(station)),
      quantity_(quantity),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)) {
  if (timestamps_.size() != values_.size()) {
    throw InvalidArgument("timeseries: timestamps and values differ in length");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("timeseries: non-finite value at " + format_iso8601(timestamps_[i]));
    }
    if (i > 0 && timestamps_[i] <= timestamps_[i - 1]) {
      throw InvalidArgument("timeseries: timestamps not strictly increasing at " +
                            format_iso8601(timestamps_[i]));
    }
  }
}

std::ptrdiff_t TimeSeries::find(Timestamp t) const noexcept {
  auto it = std::lower_bound(timestamps_.begin(), timestamps_.end(), t);
  if (it == timestamps_.end() || *it != t) return -1;
  return it - timestamps_.begin();
}

TimeSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());

  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };

  std::string station;
  std::string quantity_s;
  std::string unit;
  if (!std::getline(in, line)) fail("missing header");
  ++lineno;
  if (line.rfind('#', 0) != 0) fail("header must start with '#'");
  {
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) fail("malformed header token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "station") station = val;
      else if (key == "quantity") quantity_s = val;
      else if (key == "unit") unit = val;
      else fail("unknown header key '" + key + "'");
    }
  }
  if (station.empty() || quantity_s.empty() || unit.empty()) {
    fail("header must declare station, quantity and unit");
  }
  Quantity q{};
  try {
    q = parse_quantity(quantity_s);
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (unit != unit_of(q)) fail("unit '" + unit + "' does not match quantity " + quantity_s);

  std::vector<Timestamp> ts;
  std::vector<double> vs;
  bool have_last = false;
  Timestamp last_seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "timestamp,value") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      fail("expected 'timestamp,value'");
    }
    Timestamp t = 0;
    try {
      t = parse_iso8601(line.substr(0, comma));
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
    if (have_last && t <= last_seen) {
      fail(t == last_seen ? "duplicate timestamp" : "timestamp not strictly increasing");
    }
    have_last = true;
    last_seen = t;
    const std::string vstr = line.substr(comma + 1);
    if (vstr.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(vstr.data(), vstr.data() + vstr.size(), v);
    if (ec != std::errc() || ptr != vstr.data() + vstr.size() || !std::isfinite(v)) {
      fail("malformed value '" + vstr + "'");
    }
    ts.push_back(t);
    vs.push_back(v);
  }
  return TimeSeries(station, q, std::move(ts), std::move(vs));
}

void save_csv(const TimeSeries& ts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# station=" << ts.station() << " quantity=" << to_string(ts.quantity())
      << " unit=" << unit_of(ts.quantity()) << "\n";
  out << "timestamp,value\n";
  char buf[64];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ts.values()[i]);
    out << format_iso8601(ts.timestamps()[i]) << ',' << std::string_view(buf, ptr - buf) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

TimeSeries resample_hourly(const TimeSeries& ts, int max_gap_hours) {
  if (ts.size() < 2) throw InvalidArgument("resample_hourly: need at least 2 points");
  if (max_gap_hours <= 0) throw InvalidArgument("resample_hourly: max_gap_hours must be positive");
  const auto t = ts.timestamps();
  const auto v = ts.values();
  const Timestamp max_gap = static_cast<Timestamp>(max_gap_hours) * kSecondsPerHour;

  auto floor_hour = [](Timestamp x) {
    Timestamp q = x / kSecondsPerHour;
    if (x % kSecondsPerHour != 0 && x < 0) --q;
    return q * kSecondsPerHour;
  };
  Timestamp g = floor_hour(t.front());
  if (g < t.front()) g += kSecondsPerHour;
  const Timestamp last = floor_hour(t.back());

  std::vector<Timestamp> out_t;
  std::vector<double> out_v;
  std::size_t j = 0;  // t[j] <= g < t[j+1] once inside the span
  for (; g <= last; g += kSecondsPerHour) {
    while (j + 1 < t.size() && t[j + 1] <= g) ++j;
    if (t[j] == g) {
      out_t.push_back(g);
      out_v.push_back(v[j]);
      continue;
    }
    const Timestamp span = t[j + 1] - t[j];
    if (span > max_gap) continue;
    const double w = static_cast<double>(g - t[j]) / static_cast<double>(span);
    out_t.push_back(g);
    out_v.push_back(v[j] + w * (v[j + 1] - v[j]));
  }
  return TimeSeries(ts.station(), ts.quantity(), std::move(out_t), std::move(out_v));
}

SpikeCleaning clean_spikes(const TimeSeries& ts, int window, double k, double mad_floor) {
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgument("clean_spikes: window must be an odd integer >= 3");
  }
  if (static_cast<std::size_t>(window) > ts.size()) {
    throw InvalidArgument("clean_spikes: window larger than the series");
  }
  if (!(k > 0.0)) throw InvalidArgument("clean_spikes: k must be positive");
  const auto v = ts.values();
  const std::size_t n = v.size();
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t half = w / 2;

  std::vector<Timestamp> out_t;
  std::vector<double> out_v;
  std::vector<double> buf(w);
  std::vector<double> dev(w);
  std::size_t removed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= half ? i - half : 0;
    lo = std::min(lo, n - w);
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(lo),
              v.begin() + static_cast<std::ptrdiff_t>(lo + w), buf.begin());
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(half), buf.end());
    const double med = buf[half];
    for (std::size_t m = 0; m < w; ++m) dev[m] = std::abs(v[lo + m] - med);
    std::nth_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(half), dev.end());
    const double mad = std::max(dev[half], mad_floor);
    if (std::abs(v[i] - med) > k * mad) {
      ++removed;
      continue;
    }
    out_t.push_back(ts.timestamps()[i]);
    out_v.push_back(v[i]);
  }
  return {TimeSeries(ts.station(), ts.quantity(), std::move(out_t), std::move(out_v)), removed};
}

void SplitSpec::validate() const {
  if (train_start > train_end || test_start > test_end) {
    throw InvalidArgument("split: range start after end");
  }
  if (train_end >= test_start) {
    throw InvalidArgument("split: training years must precede and not overlap testing years");
  }
}

std::pair<TimeSeries, TimeSeries> split_by_period(const TimeSeries& ts, const SplitSpec& spec) {
  spec.validate();
  std::vector<Timestamp> tr_t, te_t;
  std::vector<double> tr_v, te_v;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Timestamp t = ts.timestamps()[i];
    const int y = year_of(t);
    if (y >= spec.train_start && y <= spec.train_end) {
      tr_t.push_back(t);
      tr_v.push_back(ts.values()[i]);
    } else if (y >= spec.test_start && y <= spec.test_end) {
      te_t.push_back(t);
      te_v.push_back(ts.values()[i]);
    }
  }
  if (tr_t.empty()) throw InvalidArgument("split: empty train partition for " + ts.station());
  if (te_t.empty()) throw InvalidArgument("split: empty test partition for " + ts.station());
  return {TimeSeries(ts.station(), ts.quantity(), std::move(tr_t), std::move(tr_v)),
          TimeSeries(ts.station(), ts.quantity(), std::move(te_t), std::move(te_v))};
}

}  // namespace hydro
