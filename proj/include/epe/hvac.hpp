#pragma once

#include <optional>
#include <vector>

#include "epe/estimation.hpp"
#include "epe/residual_net.hpp"
#include "epe/timeseries.hpp"

namespace epe {

// Biquadratic COP modifier on (outdoor temperature, humidity ratio),
// normalized to 1 at the rating point (35 degC, 0.010 kg/kg).
struct TempCurve {
  double c0 = 1.0;
  double c_t = 0.0;
  double c_t2 = 0.0;
  double c_w = 0.0;
  double c_w2 = 0.0;
  double c_tw = 0.0;
  double t_rated = 35.0;
  double w_rated = 0.010;

  double value(double t_out, double w) const;
  static TempCurve dx_default();
  static TempCurve unity();
};

struct HvacPlant {
  enum class Kind { DxCooling, Boiler };
  Kind kind = Kind::DxCooling;
  double rated_cop = 3.5;         // dx
  double rated_efficiency = 0.85; // boiler, (0, 1]
  double capacity = 1e9;          // W
  TempCurve temp_curve;           // unity for boilers
  // Part-load fraction: plf(plr) = plr / (c + (1-c) plr); c = 0 disables.
  double plf_c = 0.15;

  double plf_adjust(double plr) const;
  void validate() const;
};

struct ProcessLoadBox {
  TimeSeries load;  // W, gain-to-air sign (negative = cooling demand)
  HvacPlant plant;
};

struct PlantEnergyResult {
  TimeSeries energy;  // W electric (dx) or gas (boiler)
  TimeSeries unmet;   // W load clipped by capacity
  std::size_t overloaded_hours = 0;
};

struct CopScanResult {
  double best_cop = 0.0;
  double best_rmse = 0.0;
  std::vector<double> grid;
  std::vector<double> rmse;  // per grid point
};

struct BoilerRelationPoint {
  double p_blc = 0.0;
  double p_boiler_eff = 0.0;
  double sigma = 0.0;
};

// Best estimate of the delivered heating/cooling, gain-to-air
// sign, for a window that may lack measured q_hc.
TimeSeries reconciled_load(const HeatFlowSet& flows,
                           const ShellParameters& params,
                           const ResidualNet* net = nullptr);

// Energy drawn by the plant meeting the box load. Hours whose load sign is
// opposite to the plant's service direction (50 W deadband) draw nothing.
PlantEnergyResult plant_energy(const ProcessLoadBox& box,
                               const WeatherSeries& weather);

struct CopGrid {
  double lo = 2.0;
  double hi = 6.0;
  double step = 0.025;
  bool refine = false;  // golden-section polish between grid neighbours
};

CopScanResult estimate_cop(const ProcessLoadBox& box,
                           const WeatherSeries& weather,
                           const TimeSeries& e_measured, const CopGrid& grid);

// Trade-off curve between the shell loss scale and boiler efficiency over
// Q_BLC-dominated windows.
std::vector<BoilerRelationPoint> boiler_blc_relation(
    const HeatFlowSet& flows, const TimeSeries& gas,
    const std::vector<Interval>& windows, const std::vector<double>& p_blc_grid);

}  // namespace epe
