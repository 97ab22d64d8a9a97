#include "epe/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace epe {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

Time civil_to_time(int year, int month, int day, int hour, int minute,
                   int second) {
  return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 +
         second;
}

void time_to_civil(Time t, int& year, int& month, int& day, int& hour,
                   int& minute, int& second) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  civil_from_days(days, year, month, day);
  hour = static_cast<int>(rem / 3600);
  minute = static_cast<int>((rem % 3600) / 60);
  second = static_cast<int>(rem % 60);
}

Time parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char sep = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h,
                      &mi, &se);
  if (n < 3 || mo < 1 || mo > 12 || d < 1 || d > 31)
    throw DataError("bad timestamp: '" + s + "'");
  if (n >= 4 && sep != 'T' && sep != ' ')
    throw DataError("bad timestamp separator in '" + s + "'");
  return civil_to_time(y, mo, d, h, mi, se);
}

std::string format_timestamp(Time t) {
  int y, mo, d, h, mi, s;
  time_to_civil(t, y, mo, d, h, mi, s);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, mo, d, h,
                mi, s);
  return buf;
}

int day_of_year(Time t) {
  int y, mo, d, h, mi, s;
  time_to_civil(t, y, mo, d, h, mi, s);
  return static_cast<int>(days_from_civil(y, mo, d) - days_from_civil(y, 1, 1)) +
         1;
}

double hour_of_day(Time t) {
  std::int64_t rem = t % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<double>(rem) / 3600.0;
}

const char* unit_name(Unit u) {
  switch (u) {
    case Unit::Celsius: return "degC";
    case Unit::Watt: return "W";
    case Unit::WattHour: return "Wh";
    case Unit::MegaJoule: return "MJ";
    case Unit::WattPerSquareMeter: return "W/m2";
    case Unit::MetersPerSecond: return "m/s";
    case Unit::Dimensionless: return "-";
  }
  return "?";
}

TimeSeries::TimeSeries(Time start, Time step, std::vector<double> values,
                       Unit unit)
    : start_(start), step_(step), values_(std::move(values)), unit_(unit) {
  if (step_ <= 0) throw DataError("TimeSeries step must be > 0");
}

double TimeSeries::at_time(Time t) const { return values_[index_of(t)]; }

std::size_t TimeSeries::index_of(Time t) const {
  if (t < start_ || t >= end() || (t - start_) % step_ != 0)
    throw DataError("time " + format_timestamp(t) + " not on series grid");
  return static_cast<std::size_t>((t - start_) / step_);
}

TimeSeries TimeSeries::slice(const Interval& window) const {
  if (window.begin < start_ || window.end > end())
    throw DataError("window [" + format_timestamp(window.begin) + ", " +
                    format_timestamp(window.end) + ") not covered by series [" +
                    format_timestamp(start_) + ", " + format_timestamp(end()) +
                    ")");
  if ((window.begin - start_) % step_ != 0)
    throw DataError("window start not on series grid");
  std::size_t i0 = static_cast<std::size_t>((window.begin - start_) / step_);
  std::size_t i1 = static_cast<std::size_t>((window.end - start_) / step_);
  return TimeSeries(window.begin, step_,
                    std::vector<double>(values_.begin() + i0,
                                        values_.begin() + i1),
                    unit_);
}

TimeSeries TimeSeries::with_values(std::vector<double> v) const {
  if (v.size() != values_.size())
    throw DataError("with_values: length mismatch");
  return TimeSeries(start_, step_, std::move(v), unit_);
}

TimeSeries TimeSeries::with_unit(Unit u) const {
  return TimeSeries(start_, step_, values_, u);
}

void require_aligned(const TimeSeries& a, const TimeSeries& b,
                     const std::string& context) {
  if (a.start() != b.start() || a.step() != b.step() || a.size() != b.size())
    throw DataError(context + ": series not aligned (start/step/length)");
}

TimeSeries TimeSeries::operator+(const TimeSeries& o) const {
  require_aligned(*this, o, "operator+");
  if (unit_ != o.unit_)
    throw DataError(std::string("operator+: unit mismatch ") +
                    unit_name(unit_) + " vs " + unit_name(o.unit_));
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + o.values_[i];
  return TimeSeries(start_, step_, std::move(v), unit_);
}

TimeSeries TimeSeries::operator-(const TimeSeries& o) const {
  return *this + (-o);
}

TimeSeries TimeSeries::operator-() const { return scaled(-1.0); }

TimeSeries TimeSeries::scaled(double k) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = k * values_[i];
  return TimeSeries(start_, step_, std::move(v), unit_);
}

double TimeSeries::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

double TimeSeries::rms() const {
  if (values_.empty()) return 0.0;
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s / static_cast<double>(values_.size()));
}

double TimeSeries::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double TimeSeries::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

TimeSeries TimeSeries::constant(Time start, Time step, std::size_t n, double v,
                                Unit unit) {
  return TimeSeries(start, step, std::vector<double>(n, v), unit);
}

std::vector<TimeSeries> align(const std::vector<TimeSeries>& series,
                              const Interval& window) {
  if (series.empty()) return {};
  if (window.empty()) throw DataError("align: empty window");
  const Time step = series.front().step();
  for (const auto& s : series) {
    if (s.step() == step) continue;
    if (s.step() % step == 0 || step % s.step() == 0)
      throw DataError("align: step mismatch (" + std::to_string(s.step()) +
                      "s vs " + std::to_string(step) +
                      "s); aggregate to a common step first");
    throw DataError("align: incompatible steps " + std::to_string(s.step()) +
                    "s vs " + std::to_string(step) + "s");
  }
  std::vector<TimeSeries> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(s.slice(window));
  return out;
}

std::vector<TimeSeries> align(const std::vector<TimeSeries>& series) {
  if (series.empty()) return {};
  Interval w = series.front().span();
  for (const auto& s : series) {
    w.begin = std::max(w.begin, s.start());
    w.end = std::min(w.end, s.end());
  }
  // Snap intersection onto the first series' grid.
  const Time step = series.front().step();
  const Time off = series.front().start();
  Time b = w.begin - off;
  w.begin = off + ((b + step - 1) / step) * step;
  w.end = off + ((w.end - off) / step) * step;
  if (w.empty()) throw DataError("align: series do not overlap");
  return align(series, w);
}

TimeSeries aggregate(const TimeSeries& series, Time target_step,
                     AggregateMethod method) {
  if (target_step <= 0 || target_step % series.step() != 0)
    throw DataError("aggregate: target step " + std::to_string(target_step) +
                    "s is not an integer multiple of " +
                    std::to_string(series.step()) + "s");
  const std::size_t ratio =
      static_cast<std::size_t>(target_step / series.step());
  const std::size_t n = series.size() / ratio;
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ratio; ++j) acc += series[i * ratio + j];
    v[i] = method == AggregateMethod::Mean ? acc / static_cast<double>(ratio)
                                           : acc;
  }
  return TimeSeries(series.start(), target_step, std::move(v), series.unit());
}

TimeSeries fill_gaps(const TimeSeries& series, int max_gap) {
  std::vector<double> v = series.values();
  std::size_t i = 0;
  while (i < v.size()) {
    if (!std::isnan(v[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < v.size() && std::isnan(v[j])) ++j;
    const std::size_t len = j - i;
    if (i == 0 || j == v.size() || len > static_cast<std::size_t>(max_gap))
      throw DataError("gap of " + std::to_string(len) + " samples at " +
                      format_timestamp(series.start() +
                                       static_cast<Time>(i) * series.step()) +
                      " exceeds the interpolation limit; split the window");
    const double a = v[i - 1], b = v[j];
    for (std::size_t k = 0; k < len; ++k)
      v[i + k] = a + (b - a) * static_cast<double>(k + 1) /
                         static_cast<double>(len + 1);
    i = j;
  }
  return series.with_values(std::move(v));
}

void WeatherSeries::validate() const {
  for (const TimeSeries* s : {&ghi, &dni, &dhi, &wind_speed, &humidity_ratio})
    require_aligned(t_out, *s, "WeatherSeries");
  for (const TimeSeries* s : {&ghi, &dni, &dhi})
    for (double v : s->values())
      if (v < 0.0) throw DataError("WeatherSeries: negative irradiance");
}

WeatherSeries WeatherSeries::slice(const Interval& window) const {
  return WeatherSeries{t_out.slice(window),      ghi.slice(window),
                       dni.slice(window),        dhi.slice(window),
                       wind_speed.slice(window), humidity_ratio.slice(window)};
}

}  // namespace epe
