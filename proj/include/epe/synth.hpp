#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "epe/building.hpp"
#include "epe/thermal.hpp"
#include "epe/timeseries.hpp"

namespace epe::synth {

// Deterministic clear-ish weather with consistent ghi = dni*cos(z) + dhi.
struct WeatherParams {
  double latitude = 40.0;
  double t_mean = 22.0;        // degC
  double t_daily_amp = 6.0;    // degC
  double t_seasonal_amp = 0.0; // degC over the generated span
  double clearness = 0.75;     // [0,1]
  double wind_mean = 3.0;      // m/s
  double humidity = 0.010;     // kg/kg
};

WeatherSeries make_weather(Time start, std::size_t hours,
                           const WeatherParams& p);

// Hot-dry and temperate presets for the repeatability scenario.
WeatherParams hot_dry_climate();
WeatherParams temperate_climate();

// Office-style schedules, every day: occupied 08-18.
TimeSeries setpoint_schedule(Time start, std::size_t hours,
                             double night = 21.0, double day = 23.0);
TimeSeries lep_schedule(Time start, std::size_t hours, double base_w,
                        double peak_w);

// Massless single-zone box of the over-parametrization story.
BuildingModel make_massless_box(double wall_ua = 150.0, double ceiling_ua = 80.0,
                                double window_ua = 70.0);

// One-zone medium-office analog.
BuildingModel make_office(const std::string& name = "office");

// The audit-vs-real perturbations of the synthetic experiments. A scale of 1
// and no extra layer returns the model unchanged.
struct Perturbation {
  double conductivity_scale = 1.0;  // all opaque layers
  double window_u_scale = 1.0;
  double shgc_scale = 1.0;
  double absorptance_scale = 1.0;  // opaque solar absorptance
  std::optional<Layer> extra_wall_layer;  // appended on the inside of walls
};

BuildingModel perturb(const BuildingModel& model, const Perturbation& p,
                      const std::string& new_name);

// Randomized valid single-zone model for property tests.
BuildingModel random_model(std::mt19937_64& rng);

// Track-mode simulation of the real building; returns the measured dataset
// with t_in = setpoints and q_hc = building-summed delivered load, optionally
// with multiplicative Gaussian noise on q_hc.
MeasuredDataset synthesize_measurements(const BuildingModel& real,
                                        const WeatherSeries& weather,
                                        const TimeSeries& setpoints,
                                        const TimeSeries& lep,
                                        const Interval& window,
                                        double noise_sigma = 0.0,
                                        std::uint64_t seed = 0);

}  // namespace epe::synth
