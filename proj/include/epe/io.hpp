#pragma once

#include <string>
#include <vector>

#include "epe/building.hpp"
#include "epe/decomposition.hpp"
#include "epe/estimation.hpp"
#include "epe/timeseries.hpp"

namespace epe::io {

// Filesystem helpers. read_file throws ConfigError when the path cannot be
// opened (the path came from configuration); content problems are DataError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

// Building model JSON, schema_version 1.
BuildingModel building_from_json(const std::string& text);
std::string building_to_json(const BuildingModel& model);
BuildingModel load_building(const std::string& path);
void save_building(const std::string& path, const BuildingModel& model);

// Hourly weather CSV with header
// timestamp,t_out,ghi,dni,dhi,wind_speed,humidity_ratio. Blank or nan cells
// are gaps, filled per the short-gap policy.
WeatherSeries load_weather(const std::string& path);
void save_weather(const std::string& path, const WeatherSeries& weather);

// Measured-data CSV. Columns: timestamp, then any of t_in:<zone>, lep, q_hc,
// energy:<fuel>, fan_flow, t_mixed, t_return. The weather is attached from
// its own file.
MeasuredDataset load_measured(const std::string& path,
                              const WeatherSeries& weather);
void save_measured(const std::string& path, const MeasuredDataset& data);

// Building-total macro flows, CSV. Per-zone detail is not persisted.
void save_flows(const std::string& path, const HeatFlowSet& flows);
HeatFlowSet load_flows(const std::string& path);

// Fitted parameters + statistics, JSON, schema_version 1. The residual
// series is not serialized.
std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(const std::string& text);

// Aligned multi-column CSV with a leading timestamp column.
void save_series_csv(const std::string& path,
                     const std::vector<TimeSeries>& columns,
                     const std::vector<std::string>& names);

}  // namespace epe::io
