#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epe/decomposition.hpp"
#include "epe/solar.hpp"
#include "epe/synth.hpp"
#include "epe/thermal.hpp"

using namespace epe;

namespace {

const Time t0 = civil_to_time(2024, 6, 1);

WeatherSeries constant_weather(double t_out, std::size_t hours) {
  auto c = [&](double v, Unit u) {
    return TimeSeries::constant(t0, kHour, hours, v, u);
  };
  return WeatherSeries{c(t_out, Unit::Celsius),
                       c(0, Unit::WattPerSquareMeter),
                       c(0, Unit::WattPerSquareMeter),
                       c(0, Unit::WattPerSquareMeter),
                       c(3, Unit::MetersPerSecond),
                       c(0.01, Unit::Dimensionless)};
}

RunSpec track_spec(const BuildingModel& model, const WeatherSeries& wx,
                   double setpoint) {
  RunSpec spec;
  spec.mode = RunSpec::Mode::TrackSetpoints;
  spec.weather = wx;
  spec.window = wx.span();
  for (const Zone& z : model.zones)
    spec.setpoints.emplace(
        z.name, TimeSeries::constant(wx.t_out.start(), wx.t_out.step(),
                                     wx.t_out.size(), setpoint, Unit::Celsius));
  return spec;
}

// Independent steady-state conductance: series resistance per exterior
// surface, window U*A, and the nominal infiltration conductance.
double hand_blc(const BuildingModel& model) {
  double blc = 0.0;
  for (const Zone& z : model.zones) {
    for (const Surface& s : z.surfaces) {
      if (!s.exterior) continue;
      double r = 1.0 / s.exterior_film + 1.0 / s.interior_film;
      for (const Layer& l : s.layers) r += l.resistance();
      blc += s.area / r;
    }
    for (const Window& w : z.windows) blc += w.u_value * w.area;
    blc += 1.2 * 1006.0 * z.infiltration_ach * z.volume / 3600.0;
  }
  return blc;
}

}  // namespace

TEST_CASE("massless box: load is the conductance times the difference") {
  const BuildingModel box = synth::make_massless_box();  // 150 + 80 + 70 W/K
  const StateSpaceSystem sys = discretize(box);
  CHECK(steady_state_blc(sys) == doctest::Approx(300.0).epsilon(1e-12));

  const WeatherSeries wx = constant_weather(10.0, 48);
  const RunResult run = simulate(sys, track_spec(box, wx, 20.0));
  const TimeSeries load = run.total_ideal_load();
  for (std::size_t k = 0; k < load.size(); ++k)
    CHECK(load[k] == doctest::Approx(3000.0).epsilon(1e-9));

  // Nothing to deliver at equilibrium.
  const RunResult eq = simulate(sys, track_spec(box, constant_weather(20.0, 48),
                                                20.0));
  CHECK(std::abs(eq.total_ideal_load().max()) < 1e-6);
  CHECK(std::abs(eq.total_ideal_load().min()) < 1e-6);
}

TEST_CASE("steady load is linear in the temperature difference") {
  const BuildingModel box = synth::make_massless_box();
  const StateSpaceSystem sys = discretize(box);
  const double q10 =
      simulate(sys, track_spec(box, constant_weather(10.0, 48), 20.0))
          .total_ideal_load()[47];
  const double q5 =
      simulate(sys, track_spec(box, constant_weather(15.0, 48), 20.0))
          .total_ideal_load()[47];
  CHECK(q5 == doctest::Approx(0.5 * q10).epsilon(1e-9));
}

TEST_CASE("scaling conductivities scales the steady load with the BLC") {
  const BuildingModel box = synth::make_massless_box();
  BuildingModel heavy = box;
  for (Zone& z : heavy.zones)
    for (Surface& s : z.surfaces)
      for (Layer& l : s.layers) l.conductivity *= 2.0;
  const StateSpaceSystem sys_a = discretize(box);
  const StateSpaceSystem sys_b = discretize(heavy);
  const double qa =
      simulate(sys_a, track_spec(box, constant_weather(10.0, 48), 20.0))
          .total_ideal_load()[47];
  const double qb =
      simulate(sys_b, track_spec(heavy, constant_weather(10.0, 48), 20.0))
          .total_ideal_load()[47];
  CHECK(qb / qa == doctest::Approx(steady_state_blc(sys_b) /
                                   steady_state_blc(sys_a))
                       .epsilon(1e-9));
}

TEST_CASE("steady-state conductance matches the hand-summed resistances") {
  const BuildingModel office = synth::make_office();
  const StateSpaceSystem sys = discretize(office);
  CHECK(steady_state_blc(sys) ==
        doctest::Approx(hand_blc(office)).epsilon(1e-10));

  const BuildingModel box = synth::make_massless_box(120.0, 55.0, 25.0);
  CHECK(steady_state_blc(discretize(box)) ==
        doctest::Approx(hand_blc(box)).epsilon(1e-10));
}

TEST_CASE("tracking holds the air temperature at the setpoint") {
  const BuildingModel office = synth::make_office();
  const StateSpaceSystem sys = discretize(office);
  const WeatherSeries wx =
      synth::make_weather(t0, 72, synth::temperate_climate());
  RunSpec spec;
  spec.mode = RunSpec::Mode::TrackSetpoints;
  spec.weather = wx;
  spec.window = wx.span();
  const TimeSeries sp = synth::setpoint_schedule(t0, 72);
  spec.setpoints.emplace("main", sp);
  const RunResult run = simulate(sys, spec);
  const TimeSeries& t_air = run.air_temp.at("main");
  for (std::size_t k = 0; k < sp.size(); ++k)
    CHECK(t_air[k] == doctest::Approx(sp[k]).epsilon(1e-12));
}

TEST_CASE("superposition of outdoor temperature, solar, and internal gains") {
  const BuildingModel office = synth::make_office();
  const StateSpaceSystem sys = discretize(office);
  const WeatherSeries wx =
      synth::make_weather(t0, 72, synth::temperate_climate());
  WeatherSeries wx0 = wx;
  wx0.t_out = TimeSeries::constant(t0, kHour, 72, 0.0, Unit::Celsius);

  const TimeSeries sp = synth::setpoint_schedule(t0, 72);
  const TimeSeries lep = synth::lep_schedule(t0, 72, 1000.0, 8000.0);

  auto run = [&](const WeatherSeries& w, bool with_gains) {
    RunSpec spec;
    spec.mode = RunSpec::Mode::TrackSetpoints;
    spec.weather = w;
    spec.window = w.span();
    spec.setpoints.emplace("main", sp);
    if (with_gains) {
      spec.lep = split_lep(office, lep);
    } else {
      spec.zero_solar = true;
      spec.zero_lep = true;
    }
    return simulate(sys, spec).total_ideal_load();
  };

  const TimeSeries full = run(wx, true);       // temperature + solar + lep
  const TimeSeries temp_only = run(wx, false); // temperature
  const TimeSeries gains_only = run(wx0, true);  // solar + lep
  const TimeSeries neither = run(wx0, false);

  const TimeSeries lhs = full + neither;
  const TimeSeries rhs = temp_only + gains_only;
  const double scale = std::max(std::abs(full.min()), std::abs(full.max()));
  for (std::size_t k = 0; k < lhs.size(); ++k)
    CHECK(std::abs(lhs[k] - rhs[k]) < 1e-8 * scale);
}

TEST_CASE("free float conserves energy") {
  const BuildingModel office = synth::make_office();
  const StateSpaceSystem sys = discretize(office);
  const WeatherSeries wx =
      synth::make_weather(t0, 72, synth::temperate_climate());
  RunSpec spec;
  spec.mode = RunSpec::Mode::FreeFloat;
  spec.weather = wx;
  spec.window = wx.span();
  spec.zero_solar = true;
  spec.zero_lep = true;
  const RunResult run = simulate(sys, spec);

  // With no internal sources, the stored-energy change equals the time
  // integral of the envelope heat flow.
  const double stored =
      (sys.capacitance.array() *
       (run.final_state - run.initial_state).array())
          .sum();
  double integral = 0.0;
  for (std::size_t k = 0; k < run.envelope_heat.size(); ++k)
    integral += run.envelope_heat[k] * static_cast<double>(kHour);
  CHECK(stored == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("free float reports the prescribed process load, not hvac") {
  const BuildingModel box = synth::make_massless_box();
  const StateSpaceSystem sys = discretize(box);
  const WeatherSeries wx = constant_weather(10.0, 48);
  RunSpec spec;
  spec.mode = RunSpec::Mode::FreeFloat;
  spec.weather = wx;
  spec.window = wx.span();
  spec.process_load.emplace(
      "box", TimeSeries::constant(t0, kHour, 48, 1234.0, Unit::Watt));
  const RunResult run = simulate(sys, spec);
  CHECK(run.total_ideal_load()[10] == 1234.0);
  // Massless box in steady state floats at t_out + q / BLC.
  CHECK(run.air_temp.at("box")[47] ==
        doctest::Approx(10.0 + 1234.0 / 300.0).epsilon(1e-9));
}

TEST_CASE("transmitted solar gains") {
  synth::WeatherParams climate = synth::temperate_climate();
  const WeatherSeries wx = synth::make_weather(t0, 48, climate);

  BuildingModel b;
  b.name = "glass";
  b.latitude = climate.latitude;
  Zone z;
  z.name = "z";
  z.air_capacitance = 1e5;
  z.volume = 100.0;
  Surface s;
  s.name = "dummy";
  s.area = 10.0;
  s.layers = {{0.1, 1.0, 1000.0, 1000.0}};
  s.solar_absorptance = 0.0;
  s.solar_gain_share = 1.0;  // all transmitted solar lands on this face
  z.surfaces = {s};
  Window horiz{"horiz", 10.0, 2.0, 0.6, {180.0, 0.0}};
  Window east{"east", 10.0, 2.0, 0.6, {90.0, 90.0}};
  Window west{"west", 10.0, 2.0, 0.6, {270.0, 90.0}};

  SUBCASE("horizontal window sees exactly the global horizontal irradiance") {
    z.windows = {horiz};
    b.zones = {z};
    const TimeSeries g = solar_gains(b, wx).at("z");
    for (std::size_t k = 0; k < g.size(); ++k)
      CHECK(g[k] == doctest::Approx(0.6 * 10.0 * wx.ghi[k]).epsilon(1e-9));
  }
  SUBCASE("night hours are zero, day hours positive") {
    z.windows = {east};
    b.zones = {z};
    const TimeSeries g = solar_gains(b, wx).at("z");
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double hod = hour_of_day(t0 + static_cast<Time>(k) * kHour + 1800);
      if (hod < 4.0 || hod > 21.0) CHECK(g[k] == 0.0);
      if (hod > 8.0 && hod < 16.0) CHECK(g[k] > 0.0);
    }
  }
  SUBCASE("east and west collect the same daily total") {
    z.windows = {east};
    b.zones = {z};
    const TimeSeries ge = solar_gains(b, wx).at("z");
    z.windows = {west};
    b.zones = {z};
    const TimeSeries gw = solar_gains(b, wx).at("z");
    double sum_e = 0.0, sum_w = 0.0;
    for (std::size_t k = 0; k < 24; ++k) {
      sum_e += ge[k];
      sum_w += gw[k];
    }
    CHECK(sum_e == doctest::Approx(sum_w).epsilon(1e-9));
  }
}

TEST_CASE("sun position sanity") {
  const Time noon = civil_to_time(2024, 6, 21, 12, 0, 0);
  const Time midnight = civil_to_time(2024, 6, 21, 0, 0, 0);
  const auto at_noon = solar::sun_position(40.0, noon);
  CHECK(at_noon.cos_zenith > 0.9);  // near-solstice, latitude 40
  CHECK(at_noon.azimuth == doctest::Approx(180.0).epsilon(0.02));
  CHECK(solar::sun_position(40.0, midnight).cos_zenith <= 0.0);
  // Morning climb toward noon.
  double prev = solar::sun_position(40.0, civil_to_time(2024, 6, 21, 6)).cos_zenith;
  for (int h = 7; h <= 12; ++h) {
    const double c = solar::sun_position(40.0, civil_to_time(2024, 6, 21, h))
                         .cos_zenith;
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("model validation rejects nonphysical inputs") {
  BuildingModel bad = synth::make_office();
  bad.zones[0].surfaces[0].layers[0].conductivity = -1.0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  BuildingModel no_zones;
  no_zones.name = "empty";
  CHECK_THROWS_AS(no_zones.validate(), DataError);
  BuildingModel bad_shgc = synth::make_office();
  bad_shgc.zones[0].windows[0].shgc = 1.5;
  CHECK_THROWS_AS(bad_shgc.validate(), DataError);
}
