#pragma once

#include <map>
#include <optional>
#include <string>

#include "epe/thermal.hpp"
#include "epe/timeseries.hpp"

namespace epe {

struct DecompositionConfig {
  double t_fixed1 = 20.0;  // degC
  double t_fixed2 = 25.0;  // degC
  Interval window;
};

// The loads of the five specialized runs, per zone.
struct FiveRuns {
  std::map<std::string, TimeSeries> q1;  // track measured, sun on, lep on
  std::map<std::string, TimeSeries> q2;  // track measured, sun off
  std::map<std::string, TimeSeries> q3;  // track t_fixed1, sun off
  std::map<std::string, TimeSeries> q4;  // track t_fixed2, sun off
  std::map<std::string, TimeSeries> q5;  // track t_fixed1, sun off, lep off
};

struct ZoneFlows {
  TimeSeries q_blc;
  TimeSeries q_in;
  TimeSeries q_sun;
  TimeSeries q_lep;
  TimeSeries q1;
};

struct HeatFlowSet {
  TimeSeries q_blc;
  TimeSeries q_in;
  TimeSeries q_sun;
  TimeSeries q_lep;
  TimeSeries q1;
  std::optional<TimeSeries> q_vent;
  std::optional<TimeSeries> q_inf;
  std::map<std::string, ZoneFlows> per_zone;
};

// Executes the five specialized simulations. All runs start from one shared
// warm-up state computed with the measured setpoints and unperturbed inputs.
// The parallel variant runs the five simulations concurrently and produces
// bit-identical results to the serial one.
FiveRuns run_five(const BuildingModel& model, const MeasuredDataset& data,
                  const DecompositionConfig& cfg);
FiveRuns run_five_serial(const BuildingModel& model,
                         const MeasuredDataset& data,
                         const DecompositionConfig& cfg);

HeatFlowSet heat_flows(const FiveRuns& runs, const MeasuredDataset& data,
                       const DecompositionConfig& cfg);

struct VentInfilFlows {
  std::optional<TimeSeries> q_vent;
  std::optional<TimeSeries> q_inf;
};

VentInfilFlows vent_infil_flows(const BuildingModel& model,
                                const MeasuredDataset& data);

// Building-total LEP metered series split to zones by volume share.
std::map<std::string, TimeSeries> split_lep(const BuildingModel& model,
                                            const TimeSeries& lep);

}  // namespace epe
