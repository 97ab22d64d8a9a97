#pragma once

// Shared fixtures for the test binaries.

#include "epe/decomposition.hpp"
#include "epe/synth.hpp"

namespace epe::testing {

struct Scenario {
  BuildingModel audit;
  WeatherSeries weather;
  MeasuredDataset data;
  Interval window;
  HeatFlowSet flows;
  TimeSeries q_hc;  // measured, sliced to the window
};

inline HeatFlowSet decompose(const BuildingModel& audit,
                             const MeasuredDataset& data, const Interval& w) {
  DecompositionConfig cfg;
  cfg.window = w;
  return heat_flows(run_five(audit, data, cfg), data, cfg);
}

// Office audit vs (optionally perturbed) real building under the given
// climate; measured data synthesized from the real model.
inline Scenario office_scenario(const synth::Perturbation& pert = {},
                                int days = 14,
                                const synth::WeatherParams& climate =
                                    synth::temperate_climate(),
                                double noise_sigma = 0.0,
                                std::uint64_t seed = 1) {
  Scenario s;
  const Time start = civil_to_time(2024, 6, 1);
  const std::size_t hours = static_cast<std::size_t>(days) * 24;
  s.window = {start, start + static_cast<Time>(hours) * kHour};
  s.audit = synth::make_office("audit");
  const BuildingModel real = synth::perturb(s.audit, pert, "real");
  s.weather = synth::make_weather(start, hours, climate);
  const TimeSeries setpoints = synth::setpoint_schedule(start, hours);
  const TimeSeries lep = synth::lep_schedule(start, hours, 2000.0, 12000.0);
  s.data = synth::synthesize_measurements(real, s.weather, setpoints, lep,
                                          s.window, noise_sigma, seed);
  s.flows = decompose(s.audit, s.data, s.window);
  s.q_hc = s.data.q_hc_measured->slice(s.window);
  return s;
}

}  // namespace epe::testing
