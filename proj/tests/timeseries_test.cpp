#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epe/timeseries.hpp"

using namespace epe;

namespace {
const Time t0 = civil_to_time(2024, 6, 1);

TimeSeries hourly(std::vector<double> v, Unit u = Unit::Watt) {
  return TimeSeries(t0, kHour, std::move(v), u);
}
}  // namespace

TEST_CASE("calendar round trips and helpers") {
  CHECK(civil_to_time(1970, 1, 1) == 0);
  CHECK(civil_to_time(2024, 6, 1, 12, 30, 15) ==
        parse_timestamp("2024-06-01T12:30:15"));
  CHECK(parse_timestamp("2024-06-01 12:30:15") ==
        parse_timestamp("2024-06-01T12:30:15"));
  CHECK(format_timestamp(parse_timestamp("2024-02-29T00:00:00")) ==
        "2024-02-29T00:00:00");
  CHECK(day_of_year(civil_to_time(2024, 1, 1)) == 1);
  CHECK(day_of_year(civil_to_time(2024, 12, 31)) == 366);  // leap year
  CHECK(day_of_year(civil_to_time(2023, 12, 31)) == 365);
  CHECK(hour_of_day(civil_to_time(2024, 6, 1, 13, 30)) == doctest::Approx(13.5));
  CHECK_THROWS_AS(parse_timestamp("junk"), DataError);
  CHECK_THROWS_AS(parse_timestamp("2024-13-01T00:00:00"), DataError);
}

TEST_CASE("series construction and arithmetic") {
  const TimeSeries a = hourly({1, 2, 3});
  const TimeSeries b = hourly({10, 20, 30});
  CHECK((a + b)[2] == 33.0);
  CHECK((b - a)[0] == 9.0);
  CHECK(a.scaled(-2.0)[1] == -4.0);
  CHECK(a.mean() == doctest::Approx(2.0));
  CHECK(a.rms() == doctest::Approx(std::sqrt(14.0 / 3.0)));
  CHECK(a.min() == 1.0);
  CHECK(a.max() == 3.0);
  CHECK(a.span().length() == 3 * kHour);
  CHECK_THROWS_AS(TimeSeries(t0, 0, {1.0}, Unit::Watt), DataError);
}

TEST_CASE("arithmetic rejects misaligned or unit-mismatched operands") {
  const TimeSeries a = hourly({1, 2, 3});
  CHECK_THROWS_AS(a + hourly({1, 2}), DataError);
  CHECK_THROWS_AS(
      a + TimeSeries(t0 + kHour, kHour, {1, 2, 3}, Unit::Watt), DataError);
  CHECK_THROWS_AS(a + hourly({1, 2, 3}, Unit::Celsius), DataError);
  // Never silently coerced: scaling keeps the unit.
  CHECK(a.scaled(2.0).unit() == Unit::Watt);
}

TEST_CASE("slice and indexing") {
  const TimeSeries a = hourly({0, 1, 2, 3, 4, 5});
  const TimeSeries s = a.slice({t0 + 2 * kHour, t0 + 5 * kHour});
  CHECK(s.size() == 3);
  CHECK(s[0] == 2.0);
  CHECK(s.start() == t0 + 2 * kHour);
  CHECK(a.at_time(t0 + 4 * kHour) == 4.0);
  CHECK_THROWS_AS(a.slice({t0 - kHour, t0}), DataError);
  CHECK_THROWS_AS(a.at_time(t0 + kHour / 2), DataError);
}

TEST_CASE("align crops to the window without fabricating values") {
  const TimeSeries a = hourly({0, 1, 2, 3, 4, 5});
  const TimeSeries b(t0 + kHour, kHour, {11, 12, 13, 14, 15}, Unit::Watt);

  SUBCASE("explicit window") {
    const auto out = align({a, b}, {t0 + kHour, t0 + 4 * kHour});
    REQUIRE(out.size() == 2);
    CHECK(out[0].size() == 3);
    CHECK(out[1].size() == 3);
    CHECK(out[0][0] == 1.0);
    CHECK(out[1][0] == 11.0);
  }
  SUBCASE("intersection: one-step shift loses one value on each side") {
    const auto out = align({a, b});
    CHECK(out[0].size() == 5);
    CHECK(out[1].size() == 5);
    CHECK(out[0][0] == 1.0);  // order preserved, values untouched
    CHECK(out[1][4] == 15.0);
  }
  SUBCASE("already aligned input is the identity") {
    const auto out = align({a, a}, a.span());
    CHECK(out[0].size() == a.size());
    CHECK(out[0][5] == a[5]);
  }
  SUBCASE("step mismatch needs aggregation first") {
    const TimeSeries minute(t0, 60, std::vector<double>(120, 1.0), Unit::Watt);
    CHECK_THROWS_WITH_AS(align({a, minute}, {t0, t0 + kHour}),
                         doctest::Contains("aggregate"), DataError);
  }
  SUBCASE("disjoint series have no intersection") {
    const TimeSeries far(t0 + 100 * kHour, kHour, {1.0}, Unit::Watt);
    CHECK_THROWS_AS(align({a, far}), DataError);
  }
}

TEST_CASE("aggregate") {
  SUBCASE("constant temperature, mean") {
    const TimeSeries m(t0, 60, std::vector<double>(60, 20.0), Unit::Celsius);
    const TimeSeries h = aggregate(m, kHour, AggregateMethod::Mean);
    REQUIRE(h.size() == 1);
    CHECK(h[0] == doctest::Approx(20.0));
  }
  SUBCASE("constant power, mean") {
    const TimeSeries m(t0, 60, std::vector<double>(60, 1000.0), Unit::Watt);
    CHECK(aggregate(m, kHour, AggregateMethod::Mean)[0] ==
          doctest::Approx(1000.0));
  }
  SUBCASE("ramp 0..59 W over one hour, mean = 29.5 W") {
    std::vector<double> v(60);
    for (int i = 0; i < 60; ++i) v[i] = i;
    const TimeSeries m(t0, 60, v, Unit::Watt);
    CHECK(aggregate(m, kHour, AggregateMethod::Mean)[0] ==
          doctest::Approx(29.5));
  }
  SUBCASE("idempotent at the same step") {
    const TimeSeries h = hourly({3, 1, 4, 1, 5});
    const TimeSeries once = aggregate(h, kHour, AggregateMethod::Mean);
    const TimeSeries twice = aggregate(once, kHour, AggregateMethod::Mean);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i] == twice[i]);
  }
  SUBCASE("non-integer ratio rejected") {
    const TimeSeries m(t0, 7 * 60, std::vector<double>(10, 1.0), Unit::Watt);
    CHECK_THROWS_AS(aggregate(m, kHour, AggregateMethod::Mean), DataError);
  }
}

TEST_CASE("gap filling") {
  const double nan = std::nan("");
  SUBCASE("short gaps interpolated linearly") {
    const TimeSeries g = fill_gaps(hourly({1.0, nan, 3.0}));
    CHECK(g[1] == doctest::Approx(2.0));
    const TimeSeries g2 = fill_gaps(hourly({0.0, nan, nan, 3.0}));
    CHECK(g2[1] == doctest::Approx(1.0));
    CHECK(g2[2] == doctest::Approx(2.0));
  }
  SUBCASE("long gaps ask the caller to split the window") {
    CHECK_THROWS_WITH_AS(fill_gaps(hourly({1, nan, nan, nan, 5})),
                         doctest::Contains("split the window"), DataError);
  }
  SUBCASE("edge gaps cannot be interpolated") {
    CHECK_THROWS_AS(fill_gaps(hourly({nan, 1, 2})), DataError);
    CHECK_THROWS_AS(fill_gaps(hourly({1, 2, nan})), DataError);
  }
}

TEST_CASE("weather validation") {
  const std::size_t n = 4;
  auto c = [&](double v, Unit u) {
    return TimeSeries::constant(t0, kHour, n, v, u);
  };
  WeatherSeries wx{c(20, Unit::Celsius),
                   c(100, Unit::WattPerSquareMeter),
                   c(80, Unit::WattPerSquareMeter),
                   c(30, Unit::WattPerSquareMeter),
                   c(3, Unit::MetersPerSecond),
                   c(0.01, Unit::Dimensionless)};
  wx.validate();
  WeatherSeries bad = wx;
  bad.ghi = c(-5, Unit::WattPerSquareMeter);
  CHECK_THROWS_AS(bad.validate(), DataError);
  WeatherSeries short_t = wx;
  short_t.dni = TimeSeries::constant(t0, kHour, n - 1, 0.0,
                                     Unit::WattPerSquareMeter);
  CHECK_THROWS_AS(short_t.validate(), DataError);
}
