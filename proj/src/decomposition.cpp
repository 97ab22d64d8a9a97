#include "epe/decomposition.hpp"

#include <array>
#include <cmath>

namespace epe {

namespace {

constexpr double kAirDensity = 1.2;        // kg/m3
constexpr double kAirSpecificHeat = 1006;  // J/kg.K

RunSpec base_spec(const BuildingModel& model, const MeasuredDataset& data,
                  const DecompositionConfig& cfg) {
  RunSpec spec;
  spec.mode = RunSpec::Mode::TrackSetpoints;
  spec.weather = data.weather;
  spec.window = cfg.window;
  spec.lep = split_lep(model, data.lep);
  for (const Zone& z : model.zones) {
    auto it = data.t_in.find(z.name);
    if (it == data.t_in.end())
      throw DataError("measured indoor temperature missing for zone '" +
                      z.name + "'");
    spec.setpoints.emplace(z.name, it->second);
  }
  return spec;
}

FiveRuns run_five_impl(const BuildingModel& model, const MeasuredDataset& data,
                       const DecompositionConfig& cfg, bool parallel) {
  if (cfg.t_fixed1 == cfg.t_fixed2)
    throw ConfigError("decomposition: t_fixed1 must differ from t_fixed2");
  if (cfg.window.length() < 24 * kHour)
    throw ConfigError("decomposition window shorter than 24 h");

  const StateSpaceSystem sys = discretize(model);
  const RunSpec base = base_spec(model, data, cfg);

  // One shared warm-up trajectory keeps run differences attributable to the
  // intended perturbation.
  const Eigen::VectorXd state0 = warmup_state(sys, base);

  std::array<RunSpec, 5> specs{base, base, base, base, base};
  specs[1].zero_solar = true;
  specs[2].zero_solar = true;
  specs[2].fixed_temp_override = cfg.t_fixed1;
  specs[3].zero_solar = true;
  specs[3].fixed_temp_override = cfg.t_fixed2;
  specs[4].zero_solar = true;
  specs[4].zero_lep = true;
  specs[4].fixed_temp_override = cfg.t_fixed1;

  std::array<RunResult, 5> results;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < 5; ++i)
    results[i] = simulate_from(sys, specs[i], state0);

  FiveRuns runs;
  runs.q1 = std::move(results[0].ideal_load);
  runs.q2 = std::move(results[1].ideal_load);
  runs.q3 = std::move(results[2].ideal_load);
  runs.q4 = std::move(results[3].ideal_load);
  runs.q5 = std::move(results[4].ideal_load);
  return runs;
}

TimeSeries sum_over_zones(const std::map<std::string, TimeSeries>& m) {
  TimeSeries total;
  bool first = true;
  for (const auto& [zone, s] : m) {
    total = first ? s : total + s;
    first = false;
  }
  return total;
}

}  // namespace

std::map<std::string, TimeSeries> split_lep(const BuildingModel& model,
                                            const TimeSeries& lep) {
  double total_volume = 0.0;
  for (const Zone& z : model.zones) total_volume += z.volume;
  std::map<std::string, TimeSeries> out;
  for (const Zone& z : model.zones)
    out.emplace(z.name, lep.scaled(z.volume / total_volume));
  return out;
}

FiveRuns run_five(const BuildingModel& model, const MeasuredDataset& data,
                  const DecompositionConfig& cfg) {
  return run_five_impl(model, data, cfg, true);
}

FiveRuns run_five_serial(const BuildingModel& model,
                         const MeasuredDataset& data,
                         const DecompositionConfig& cfg) {
  return run_five_impl(model, data, cfg, false);
}

HeatFlowSet heat_flows(const FiveRuns& runs, const MeasuredDataset& data,
                       const DecompositionConfig& cfg) {
  HeatFlowSet set;
  const double denom = cfg.t_fixed1 - cfg.t_fixed2;

  for (const auto& [zone, q1] : runs.q1) {
    const TimeSeries& q2 = runs.q2.at(zone);
    const TimeSeries& q3 = runs.q3.at(zone);
    const TimeSeries& q4 = runs.q4.at(zone);
    const TimeSeries& q5 = runs.q5.at(zone);
    require_aligned(q1, q2, "heat_flows");
    const TimeSeries t_mea = data.t_in.at(zone).slice(q1.span());

    ZoneFlows zf;
    zf.q_sun = q2 - q1;

    // Interpolate between the two fixed-temperature runs at the measured
    // indoor temperature.
    std::vector<double> qin(q1.size());
    for (std::size_t k = 0; k < q1.size(); ++k) {
      const double w3 = (t_mea[k] - cfg.t_fixed2) / denom;
      const double w4 = (cfg.t_fixed1 - t_mea[k]) / denom;
      qin[k] = -q2[k] + q3[k] * w3 + q4[k] * w4;
    }
    zf.q_in = q1.with_values(std::move(qin));

    zf.q_blc = -q2 + q3 - q5 - zf.q_in;
    zf.q_lep = -q3 + q5;
    zf.q1 = q1;
    set.per_zone.emplace(zone, std::move(zf));
  }

  std::map<std::string, TimeSeries> blc, in, sun, lep, q1;
  for (const auto& [zone, zf] : set.per_zone) {
    blc.emplace(zone, zf.q_blc);
    in.emplace(zone, zf.q_in);
    sun.emplace(zone, zf.q_sun);
    lep.emplace(zone, zf.q_lep);
    q1.emplace(zone, zf.q1);
  }
  set.q_blc = sum_over_zones(blc);
  set.q_in = sum_over_zones(in);
  set.q_sun = sum_over_zones(sun);
  set.q_lep = sum_over_zones(lep);
  set.q1 = sum_over_zones(q1);
  return set;
}

VentInfilFlows vent_infil_flows(const BuildingModel& model,
                                const MeasuredDataset& data) {
  VentInfilFlows out;

  if (data.fan_flow && data.t_mixed && data.t_return) {
    const TimeSeries& flow = *data.fan_flow;
    require_aligned(flow, *data.t_mixed, "vent_infil_flows");
    require_aligned(flow, *data.t_return, "vent_infil_flows");
    std::vector<double> v(flow.size());
    for (std::size_t k = 0; k < flow.size(); ++k)
      v[k] = flow[k] * kAirSpecificHeat *
             ((*data.t_mixed)[k] - (*data.t_return)[k]);
    out.q_vent = TimeSeries(flow.start(), flow.step(), std::move(v), Unit::Watt);
  }

  // Linear wind-speed ACH model, nominal at 4 m/s.
  const TimeSeries& t_out = data.weather.t_out;
  const TimeSeries& wind = data.weather.wind_speed;
  std::vector<double> qi(t_out.size(), 0.0);
  bool have_t_in = true;
  for (const Zone& z : model.zones) {
    auto it = data.t_in.find(z.name);
    if (it == data.t_in.end()) {
      have_t_in = false;
      break;
    }
    const TimeSeries t_in = it->second.slice(t_out.span());
    for (std::size_t k = 0; k < t_out.size(); ++k) {
      const double ach = z.infiltration_ach * (0.5 + 0.125 * wind[k]);
      qi[k] += kAirDensity * kAirSpecificHeat * ach * z.volume / 3600.0 *
               (t_out[k] - t_in[k]);
    }
  }
  if (have_t_in)
    out.q_inf =
        TimeSeries(t_out.start(), t_out.step(), std::move(qi), Unit::Watt);
  return out;
}

}  // namespace epe
