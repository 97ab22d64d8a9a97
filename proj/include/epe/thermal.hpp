#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epe/building.hpp"
#include "epe/solar.hpp"
#include "epe/timeseries.hpp"

namespace epe {

// Linear RC network realized from a BuildingModel. Immutable after
// discretize(); simulate() keeps all mutable state local, so independent runs
// can share one system across threads.
struct StateSpaceSystem {
  int n = 0;                    // node count
  Eigen::MatrixXd laplacian;    // internal conductance Laplacian, W/K
  Eigen::VectorXd capacitance;  // J/K, zero on massless nodes
  Eigen::VectorXd g_out;        // conductance to outdoor air per node, W/K

  std::vector<std::string> zone_names;
  std::vector<int> air_node;  // per zone

  struct OpaqueSolarTarget {
    int node;
    double absorptance_area;  // m2 weighted
    Orientation orientation;
  };
  std::vector<OpaqueSolarTarget> opaque_solar;

  struct WindowAperture {
    int zone;
    double shgc_area;  // m2 weighted
    Orientation orientation;
  };
  std::vector<WindowAperture> apertures;

  struct NodeShare {
    int node;
    double share;
  };
  // Per zone: interior-face deposition of transmitted solar (shares sum to
  // 1 - solar_to_air_fraction) and of radiative LEP (shares sum to
  // lep_radiative_fraction).
  std::vector<std::vector<NodeShare>> solar_deposit;
  std::vector<double> solar_air_fraction;
  std::vector<std::vector<NodeShare>> lep_deposit;
  std::vector<double> lep_air_fraction;

  double latitude = 40.0;

  int zone_index(const std::string& name) const;
};

struct RunSpec {
  enum class Mode { TrackSetpoints, FreeFloat };
  Mode mode = Mode::TrackSetpoints;
  std::map<std::string, TimeSeries> setpoints;  // per zone, degC
  bool zero_solar = false;
  bool zero_lep = false;
  std::optional<double> fixed_temp_override;    // degC, applied to every zone
  std::map<std::string, TimeSeries> process_load;  // per zone, W
  WeatherSeries weather;
  std::map<std::string, TimeSeries> lep;        // per zone, W
  Interval window;
};

struct RunResult {
  std::map<std::string, TimeSeries> ideal_load;  // W, gain to air node
  std::map<std::string, TimeSeries> air_temp;    // degC
  TimeSeries envelope_heat;  // W, building total through the envelope
  Eigen::VectorXd initial_state;
  Eigen::VectorXd final_state;
  int substeps_per_step = 0;

  TimeSeries total_ideal_load() const;
};

StateSpaceSystem discretize(const BuildingModel& model);

// Backward Euler at the series step with 4 fixed substeps. Track mode solves
// the air-node balance exactly for the delivered load.
RunResult simulate(const StateSpaceSystem& system, const RunSpec& spec);

// Run only the 7-day warm-up (first day of the window tiled) and return the
// settled node state.
Eigen::VectorXd warmup_state(const StateSpaceSystem& system,
                             const RunSpec& spec);

// Simulate from a given state, skipping warm-up.
RunResult simulate_from(const StateSpaceSystem& system, const RunSpec& spec,
                        const Eigen::VectorXd& state0);

// Transmitted solar per zone (windows only), W.
std::map<std::string, TimeSeries> solar_gains(const BuildingModel& model,
                                              const WeatherSeries& weather);

// Steady-state conductance from the (uniform) indoor air temperature to the
// outdoor air, W/K. The BLC of the glossary.
double steady_state_blc(const StateSpaceSystem& system);

}  // namespace epe
