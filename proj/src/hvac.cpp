#include "epe/hvac.hpp"

#include <algorithm>
#include <cmath>

namespace epe {

namespace {
constexpr double kDeadband = 50.0;  // W
}

double TempCurve::value(double t_out, double w) const {
  const double dt = t_out - t_rated;
  const double dw = w - w_rated;
  return c0 + c_t * dt + c_t2 * dt * dt + c_w * dw + c_w2 * dw * dw +
         c_tw * dt * dw;
}

TempCurve TempCurve::dx_default() {
  TempCurve c;
  c.c_t = -0.012;
  c.c_t2 = -0.0001;
  c.c_w = -4.0;
  return c;
}

TempCurve TempCurve::unity() { return TempCurve{}; }

double HvacPlant::plf_adjust(double plr) const {
  if (plf_c <= 0.0) return 1.0;
  return plr / (plf_c + (1.0 - plf_c) * plr);
}

void HvacPlant::validate() const {
  if (kind == Kind::DxCooling && rated_cop <= 0.0)
    throw ConfigError("HvacPlant: rated_cop must be > 0");
  if (kind == Kind::Boiler &&
      (rated_efficiency <= 0.0 || rated_efficiency > 1.0))
    throw ConfigError("HvacPlant: rated_efficiency must be in (0, 1]");
  if (capacity <= 0.0) throw ConfigError("HvacPlant: capacity must be > 0");
}

TimeSeries reconciled_load(const HeatFlowSet& flows,
                           const ShellParameters& params,
                           const ResidualNet* net) {
  TimeSeries q = flows.q_blc.scaled(params.p_blc);
  q = q + flows.q_in.scaled(params.p_in);
  q = q + flows.q_sun.scaled(params.p_sun);
  q = q + flows.q_lep.scaled(params.p_lep);
  for (const auto& [key, tf] : params.tf)
    q = q + tf_flow(flow_by_key(flows, key), tf.alpha, tf.beta);
  q = -q;
  if (net) {
    const TimeSeries r = predict_residuals(
        *net, residual_net_input_series(flows, params), residual_net_inputs());
    q = q + r;
  }
  return q;
}

PlantEnergyResult plant_energy(const ProcessLoadBox& box,
                               const WeatherSeries& weather) {
  box.plant.validate();
  const TimeSeries& load = box.load;
  const WeatherSeries wx = weather.slice(load.span());
  const bool cooling = box.plant.kind == HvacPlant::Kind::DxCooling;

  std::vector<double> energy(load.size(), 0.0), unmet(load.size(), 0.0);
  PlantEnergyResult res;
  for (std::size_t k = 0; k < load.size(); ++k) {
    const double demand = cooling ? -load[k] : load[k];
    if (demand <= kDeadband) continue;
    double served = demand;
    if (served > box.plant.capacity) {
      served = box.plant.capacity;
      unmet[k] = demand - served;
      ++res.overloaded_hours;
    }
    const double plr = served / box.plant.capacity;
    double denom;
    if (cooling) {
      const double curve =
          box.plant.temp_curve.value(wx.t_out[k], wx.humidity_ratio[k]);
      if (curve <= 0.0)
        throw NumericalError(
            "plant_energy: temperature curve non-positive at T_out=" +
            std::to_string(wx.t_out[k]));
      denom = box.plant.rated_cop * curve * box.plant.plf_adjust(plr);
    } else {
      denom = box.plant.rated_efficiency * box.plant.plf_adjust(plr);
    }
    energy[k] = served / denom;
  }
  res.energy = TimeSeries(load.start(), load.step(), std::move(energy),
                          Unit::Watt);
  res.unmet =
      TimeSeries(load.start(), load.step(), std::move(unmet), Unit::Watt);
  return res;
}

namespace {

double scan_rmse(const ProcessLoadBox& box, const WeatherSeries& weather,
                 const TimeSeries& e_measured, double cop) {
  ProcessLoadBox b = box;
  b.plant.rated_cop = cop;
  const TimeSeries e = plant_energy(b, weather).energy;
  require_aligned(e, e_measured, "estimate_cop");
  return (e - e_measured).rms();
}

}  // namespace

CopScanResult estimate_cop(const ProcessLoadBox& box,
                           const WeatherSeries& weather,
                           const TimeSeries& e_measured, const CopGrid& grid) {
  if (grid.hi <= grid.lo || grid.step <= 0.0)
    throw ConfigError("estimate_cop: bad grid");
  CopScanResult res;
  for (double c = grid.lo; c <= grid.hi + 1e-9; c += grid.step)
    res.grid.push_back(c);
  res.rmse.resize(res.grid.size());

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(res.grid.size()); ++i)
    res.rmse[i] = scan_rmse(box, weather, e_measured, res.grid[i]);

  const auto it = std::min_element(res.rmse.begin(), res.rmse.end());
  const std::size_t best = static_cast<std::size_t>(it - res.rmse.begin());
  res.best_cop = res.grid[best];
  res.best_rmse = *it;

  const double lo = *std::min_element(res.rmse.begin(), res.rmse.end());
  const double hi = *std::max_element(res.rmse.begin(), res.rmse.end());
  if (hi - lo < 1e-6 * std::max(hi, 1e-300))
    throw NumericalError(
        "estimate_cop: RMSE flat across the grid; COP unidentifiable");

  if (grid.refine && best > 0 && best + 1 < res.grid.size()) {
    // Golden-section polish between the neighbours of the grid optimum.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = res.grid[best - 1], b = res.grid[best + 1];
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = scan_rmse(box, weather, e_measured, c1);
    double f2 = scan_rmse(box, weather, e_measured, c2);
    for (int i = 0; i < 40 && b - a > 1e-6; ++i) {
      if (f1 < f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = scan_rmse(box, weather, e_measured, c1);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = scan_rmse(box, weather, e_measured, c2);
      }
    }
    const double cop = 0.5 * (a + b);
    const double rmse = scan_rmse(box, weather, e_measured, cop);
    if (rmse < res.best_rmse) {
      res.best_cop = cop;
      res.best_rmse = rmse;
    }
  }
  return res;
}

std::vector<BoilerRelationPoint> boiler_blc_relation(
    const HeatFlowSet& flows, const TimeSeries& gas,
    const std::vector<Interval>& windows,
    const std::vector<double>& p_blc_grid) {
  require_aligned(flows.q_blc, gas, "boiler_blc_relation");

  std::vector<std::size_t> idx;
  for (const Interval& w : windows) {
    const std::size_t i0 = flows.q_blc.index_of(w.begin);
    const std::size_t i1 =
        i0 + static_cast<std::size_t>(w.length() / flows.q_blc.step());
    for (std::size_t i = i0; i < i1; ++i) idx.push_back(i);
  }
  if (idx.size() < 2)
    throw DataError("boiler_blc_relation: selected windows too short");

  double gas2 = 0.0;
  for (std::size_t i : idx) gas2 += gas[i] * gas[i];
  if (gas2 <= 0.0)
    throw DataError("boiler_blc_relation: gas is zero over the windows");

  auto secondary = [&](std::size_t i) {
    double s = flows.q_lep[i] + flows.q_sun[i] + flows.q_in[i];
    if (flows.q_vent) s += (*flows.q_vent)[i];
    if (flows.q_inf) s += (*flows.q_inf)[i];
    return s;
  };

  std::vector<BoilerRelationPoint> out;
  for (double p : p_blc_grid) {
    double num = 0.0;
    for (std::size_t i : idx)
      num += gas[i] * -(p * flows.q_blc[i] + secondary(i));
    const double eff = num / gas2;
    double ssr = 0.0;
    for (std::size_t i : idx) {
      const double r = p * flows.q_blc[i] + eff * gas[i] + secondary(i);
      ssr += r * r;
    }
    const double s2 = ssr / static_cast<double>(idx.size() - 1);
    out.push_back({p, eff, std::sqrt(s2 / gas2)});
  }
  return out;
}

}  // namespace epe
