#include "epe/synth.hpp"

#include <cmath>

#include "epe/decomposition.hpp"
#include "epe/solar.hpp"

namespace epe::synth {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

WeatherSeries make_weather(Time start, std::size_t hours,
                           const WeatherParams& p) {
  std::vector<double> t_out(hours), ghi(hours), dni(hours), dhi(hours),
      wind(hours), hum(hours);
  for (std::size_t k = 0; k < hours; ++k) {
    const Time t = start + static_cast<Time>(k) * kHour;
    const Time mid = t + kHour / 2;
    const double hod = hour_of_day(mid);
    const double season =
        hours > 1 ? std::sin(kPi * static_cast<double>(k) /
                             static_cast<double>(hours))
                  : 0.0;
    t_out[k] = p.t_mean + p.t_seasonal_amp * season +
               p.t_daily_amp * std::sin(2.0 * kPi * (hod - 9.0) / 24.0);
    const double cosz = solar::sun_position(p.latitude, mid).cos_zenith;
    if (cosz > 0.0) {
      dni[k] = 950.0 * p.clearness * std::pow(cosz, 0.3);
      dhi[k] = 120.0 * (1.0 - 0.5 * p.clearness) * cosz;
      ghi[k] = dni[k] * cosz + dhi[k];
    }
    wind[k] = p.wind_mean * (1.0 + 0.3 * std::sin(2.0 * kPi * hod / 24.0));
    hum[k] = p.humidity;
  }
  auto mk = [&](std::vector<double>& v, Unit u) {
    return TimeSeries(start, kHour, std::move(v), u);
  };
  return WeatherSeries{mk(t_out, Unit::Celsius),
                       mk(ghi, Unit::WattPerSquareMeter),
                       mk(dni, Unit::WattPerSquareMeter),
                       mk(dhi, Unit::WattPerSquareMeter),
                       mk(wind, Unit::MetersPerSecond),
                       mk(hum, Unit::Dimensionless)};
}

WeatherParams hot_dry_climate() {
  WeatherParams p;
  p.latitude = 33.4;
  p.t_mean = 30.0;
  p.t_daily_amp = 8.0;
  p.clearness = 0.85;
  p.humidity = 0.007;
  return p;
}

WeatherParams temperate_climate() {
  WeatherParams p;
  p.latitude = 40.0;
  p.t_mean = 18.0;
  p.t_daily_amp = 5.0;
  p.clearness = 0.6;
  p.humidity = 0.009;
  return p;
}

TimeSeries setpoint_schedule(Time start, std::size_t hours, double night,
                             double day) {
  std::vector<double> v(hours);
  for (std::size_t k = 0; k < hours; ++k) {
    const double hod = hour_of_day(start + static_cast<Time>(k) * kHour);
    v[k] = (hod >= 8.0 && hod < 18.0) ? day : night;
  }
  return TimeSeries(start, kHour, std::move(v), Unit::Celsius);
}

TimeSeries lep_schedule(Time start, std::size_t hours, double base_w,
                        double peak_w) {
  std::vector<double> v(hours);
  for (std::size_t k = 0; k < hours; ++k) {
    const double hod = hour_of_day(start + static_cast<Time>(k) * kHour);
    v[k] = (hod >= 8.0 && hod < 18.0) ? peak_w : base_w;
  }
  return TimeSeries(start, kHour, std::move(v), Unit::Watt);
}

BuildingModel make_massless_box(double wall_ua, double ceiling_ua,
                                double window_ua) {
  // Thin low-mass layers with large films so the component U*A dominates.
  auto surface = [](const std::string& name, double ua, double tilt) {
    Surface s;
    s.name = name;
    s.area = ua;  // with R such that U = 1 per m2 including films
    // films 1000 W/m2K each, layer R = 1 - 2/1000
    s.exterior_film = 1000.0;
    s.interior_film = 1000.0;
    s.layers = {{0.001, 0.001 / (1.0 - 0.002), 1.0, 1.0}};
    s.solar_absorptance = 0.0;
    s.solar_gain_share = 0.0;
    s.orientation = {180.0, tilt};
    return s;
  };
  Zone z;
  z.name = "box";
  z.air_capacitance = 1.0;  // effectively massless at hourly steps
  z.volume = 100.0;
  z.solar_to_air_fraction = 1.0;
  z.surfaces = {surface("walls", wall_ua, 90.0),
                surface("ceiling", ceiling_ua, 0.0)};
  Window w;
  w.name = "window";
  w.area = window_ua / 2.5;
  w.u_value = 2.5;
  w.shgc = 0.0;
  w.orientation = {180.0, 90.0};
  z.windows = {w};

  BuildingModel m;
  m.name = "massless-box";
  m.zones = {z};
  return m;
}

BuildingModel make_office(const std::string& name) {
  const Layer concrete{0.10, 1.7, 2300.0, 900.0};
  const Layer insulation{0.05, 0.04, 30.0, 1200.0};
  const Layer gypsum{0.013, 0.16, 800.0, 1090.0};

  Zone z;
  z.name = "main";
  z.volume = 5400.0;  // 1800 m2 x 3 m
  z.air_capacitance = 2.0e7;  // air plus light furnishings
  z.infiltration_ach = 0.2;
  z.solar_to_air_fraction = 0.2;
  z.lep_radiative_fraction = 0.5;

  auto wall = [&](const std::string& n, double az) {
    Surface s;
    s.name = n;
    s.area = 130.0;
    s.layers = {concrete, insulation, gypsum};
    s.solar_absorptance = 0.6;
    s.solar_gain_share = 0.06;
    s.orientation = {az, 90.0};
    return s;
  };
  z.surfaces = {wall("wall-n", 0.0), wall("wall-e", 90.0),
                wall("wall-s", 180.0), wall("wall-w", 270.0)};

  Surface roof;
  roof.name = "roof";
  roof.area = 1800.0;
  roof.layers = {{0.01, 45.0, 7800.0, 500.0}, insulation, gypsum};
  roof.solar_absorptance = 0.7;
  roof.solar_gain_share = 0.12;
  roof.orientation = {180.0, 0.0};
  z.surfaces.push_back(roof);

  Surface slab;  // interior mass, no outdoor coupling
  slab.name = "floor-slab";
  slab.area = 1800.0;
  slab.layers = {{0.15, 1.7, 2300.0, 900.0}};
  slab.exterior = false;
  slab.solar_absorptance = 0.0;
  slab.solar_gain_share = 0.44;
  slab.orientation = {180.0, 0.0};
  z.surfaces.push_back(slab);

  auto window = [](const std::string& n, double az) {
    Window w;
    w.name = n;
    w.area = 45.0;
    w.u_value = 2.5;
    w.shgc = 0.5;
    w.orientation = {az, 90.0};
    return w;
  };
  z.windows = {window("win-n", 0.0), window("win-e", 90.0),
               window("win-s", 180.0), window("win-w", 270.0)};

  BuildingModel m;
  m.name = name;
  m.latitude = 40.0;
  m.zones = {z};
  m.validate();
  return m;
}

BuildingModel perturb(const BuildingModel& model, const Perturbation& p,
                      const std::string& new_name) {
  BuildingModel out = model;
  out.name = new_name;
  for (Zone& z : out.zones) {
    for (Surface& s : z.surfaces) {
      for (Layer& l : s.layers) l.conductivity *= p.conductivity_scale;
      s.solar_absorptance =
          std::min(1.0, s.solar_absorptance * p.absorptance_scale);
      if (p.extra_wall_layer && s.exterior &&
          std::abs(s.orientation.tilt - 90.0) < 1e-9)
        s.layers.push_back(*p.extra_wall_layer);
    }
    for (Window& w : z.windows) {
      w.u_value *= p.window_u_scale;
      w.shgc = std::min(1.0, w.shgc * p.shgc_scale);
    }
  }
  out.validate();
  return out;
}

BuildingModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  Zone z;
  z.name = "z0";
  z.volume = range(200.0, 8000.0);
  z.air_capacitance = z.volume * range(1500.0, 8000.0);
  z.infiltration_ach = range(0.0, 0.6);
  z.solar_to_air_fraction = range(0.1, 0.5);
  z.lep_radiative_fraction = range(0.0, 0.7);

  const int n_surf = 2 + static_cast<int>(u(rng) * 3.0);
  for (int i = 0; i < n_surf; ++i) {
    Surface s;
    s.name = "s" + std::to_string(i);
    s.area = range(40.0, 400.0);
    const int n_layers = 1 + static_cast<int>(u(rng) * 3.0);
    for (int l = 0; l < n_layers; ++l)
      s.layers.push_back({range(0.01, 0.2), range(0.03, 2.0),
                          range(20.0, 2400.0), range(700.0, 1500.0)});
    s.exterior = u(rng) < 0.8;
    s.solar_absorptance = range(0.2, 0.9);
    s.exterior_film = range(10.0, 30.0);
    s.interior_film = range(5.0, 10.0);
    s.orientation = {range(0.0, 360.0), s.exterior ? range(0.0, 90.0) : 90.0};
    z.surfaces.push_back(s);
  }
  // Distribute the non-air solar share uniformly over surfaces.
  const double share = (1.0 - z.solar_to_air_fraction) /
                       static_cast<double>(z.surfaces.size());
  for (Surface& s : z.surfaces) s.solar_gain_share = share;

  const int n_win = 1 + static_cast<int>(u(rng) * 3.0);
  for (int i = 0; i < n_win; ++i) {
    Window w;
    w.name = "w" + std::to_string(i);
    w.area = range(5.0, 60.0);
    w.u_value = range(1.0, 4.0);
    w.shgc = range(0.2, 0.8);
    w.orientation = {range(0.0, 360.0), 90.0};
    z.windows.push_back(w);
  }

  BuildingModel m;
  m.name = "random";
  m.latitude = range(25.0, 55.0);
  m.zones = {z};
  m.validate();
  return m;
}

MeasuredDataset synthesize_measurements(const BuildingModel& real,
                                        const WeatherSeries& weather,
                                        const TimeSeries& setpoints,
                                        const TimeSeries& lep,
                                        const Interval& window,
                                        double noise_sigma,
                                        std::uint64_t seed) {
  const StateSpaceSystem sys = discretize(real);
  RunSpec spec;
  spec.mode = RunSpec::Mode::TrackSetpoints;
  spec.weather = weather;
  spec.window = window;
  spec.lep = split_lep(real, lep);
  for (const Zone& z : real.zones) spec.setpoints.emplace(z.name, setpoints);

  const RunResult run = simulate(sys, spec);
  TimeSeries q_hc = run.total_ideal_load();
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    std::vector<double> v = q_hc.values();
    for (double& x : v) x *= 1.0 + gauss(rng);
    q_hc = q_hc.with_values(std::move(v));
  }

  MeasuredDataset data;
  for (const Zone& z : real.zones)
    data.t_in.emplace(z.name, setpoints.slice(window));
  data.lep = lep;
  data.q_hc_measured = std::move(q_hc);
  data.weather = weather;
  return data;
}

}  // namespace epe::synth
