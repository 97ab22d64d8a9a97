#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epe/errors.hpp"

namespace epe {

// Naive local time, seconds since 1970-01-01 00:00:00 (no time zone, no DST).
using Time = std::int64_t;

constexpr Time kHour = 3600;

// Civil calendar <-> seconds, proleptic Gregorian.
Time civil_to_time(int year, int month, int day, int hour = 0, int minute = 0,
                   int second = 0);
void time_to_civil(Time t, int& year, int& month, int& day, int& hour,
                   int& minute, int& second);

// "YYYY-MM-DDTHH:MM:SS" (the 'T' may be a space; seconds optional).
Time parse_timestamp(const std::string& s);
std::string format_timestamp(Time t);

// Day of year in [1, 366] and fractional clock hour of day.
int day_of_year(Time t);
double hour_of_day(Time t);

enum class Unit {
  Celsius,
  Watt,
  WattHour,
  MegaJoule,
  WattPerSquareMeter,
  MetersPerSecond,
  Dimensionless,
};

const char* unit_name(Unit u);

// Half-open interval [begin, end) in naive local seconds.
struct Interval {
  Time begin = 0;
  Time end = 0;
  Time length() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

enum class AggregateMethod { Mean, Sum };

// Uniformly sampled scalar series. Immutable by convention after construction:
// all operations return new series.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(Time start, Time step, std::vector<double> values, Unit unit);

  Time start() const { return start_; }
  Time step() const { return step_; }
  Unit unit() const { return unit_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  Time end() const { return start_ + step_ * static_cast<Time>(size()); }
  Interval span() const { return {start_, end()}; }

  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  double at_time(Time t) const;
  std::size_t index_of(Time t) const;

  TimeSeries slice(const Interval& window) const;
  TimeSeries with_values(std::vector<double> v) const;
  TimeSeries with_unit(Unit u) const;

  // Arithmetic requires identical start/step/length and, for +/-, equal units.
  TimeSeries operator+(const TimeSeries& o) const;
  TimeSeries operator-(const TimeSeries& o) const;
  TimeSeries operator-() const;
  TimeSeries scaled(double k) const;

  double mean() const;
  double rms() const;
  double min() const;
  double max() const;

  static TimeSeries constant(Time start, Time step, std::size_t n, double v,
                             Unit unit);

 private:
  Time start_ = 0;
  Time step_ = kHour;
  std::vector<double> values_;
  Unit unit_ = Unit::Dimensionless;
};

void require_aligned(const TimeSeries& a, const TimeSeries& b,
                     const std::string& context);

// Crops every series to the window. All series must share the same step and
// cover the window; minute series against an hourly grid must be aggregated
// first.
std::vector<TimeSeries> align(const std::vector<TimeSeries>& series,
                              const Interval& window);

// Intersection overload.
std::vector<TimeSeries> align(const std::vector<TimeSeries>& series);

// target_step must be an integer multiple of the series step. Mean for
// intensive quantities, Sum for per-interval totals.
TimeSeries aggregate(const TimeSeries& series, Time target_step,
                     AggregateMethod method);

// Ingestion gap policy: runs of <= max_gap NaNs are linearly interpolated;
// a longer gap is a DataError telling the caller to split the window.
TimeSeries fill_gaps(const TimeSeries& series, int max_gap = 2);

struct WeatherSeries {
  TimeSeries t_out;          // degC
  TimeSeries ghi;            // W/m2 global horizontal
  TimeSeries dni;            // W/m2 direct normal
  TimeSeries dhi;            // W/m2 diffuse horizontal
  TimeSeries wind_speed;     // m/s
  TimeSeries humidity_ratio; // kg/kg

  void validate() const;  // alignment + nonnegative irradiance
  Interval span() const { return t_out.span(); }
  WeatherSeries slice(const Interval& window) const;
};

struct MeasuredDataset {
  std::map<std::string, TimeSeries> t_in;  // per zone, degC
  TimeSeries lep;                          // W, building total
  std::optional<TimeSeries> q_hc_measured; // W, gain to air node
  std::map<std::string, TimeSeries> energy;  // fuel -> W equivalent
  WeatherSeries weather;

  // Real-building extensions (air-handler channels); absent on the synthetic
  // path.
  std::optional<TimeSeries> fan_flow;  // kg/s, total supply
  std::optional<TimeSeries> t_mixed;   // degC
  std::optional<TimeSeries> t_return;  // degC
};

}  // namespace epe
