#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epe/decomposition.hpp"
#include "epe/estimation.hpp"
#include "epe/hvac.hpp"
#include "epe/residual_net.hpp"
#include "epe/synth.hpp"

namespace epe {

struct HvacSettings {
  std::string kind = "none";  // "none", "dx", "boiler"
  double rated_cop = 3.5;
  double rated_efficiency = 0.85;
  double capacity = 1e9;           // W
  bool default_dx_curve = true;    // false = flat unity curve
  CopGrid cop_grid;
  // Loss-scale grid for the boiler trade-off curve.
  double p_blc_lo = 0.8;
  double p_blc_hi = 1.6;
  double p_blc_step = 0.05;
};

// Inputs of the synthetic path ("synthesize" in weather_file/measured_data).
struct SynthSettings {
  std::string climate = "temperate";  // or "hot-dry"
  double setpoint_night = 21.0;       // degC
  double setpoint_day = 23.0;
  double lep_base = 2000.0;           // W
  double lep_peak = 12000.0;
  double noise_sigma = 0.0;           // relative, on q_hc
  double true_cop = 3.5;              // generating plant for stage-2 energy
};

struct ProjectConfig {
  std::string building_file;       // audit model JSON
  std::string real_building_file;  // synthetic mode only
  std::string weather_file;        // CSV path or "synthesize"
  std::string measured_data;       // CSV path or "synthesize"
  Interval stage1_window;
  Interval stage2_window;          // empty = skip stage 2
  DecompositionConfig decomposition;  // window field ignored (per stage)
  std::vector<std::string> free_params;  // "p_blc", ...
  std::vector<std::string> active_tfs;   // flow keys, e.g. "q_sun"
  bool train_net = true;
  TrainConfig train;
  HvacSettings hvac;
  SynthSettings synth;
  std::uint64_t seed = 1;

  void validate() const;
};

ProjectConfig config_from_json(const std::string& text);
std::string config_to_json(const ProjectConfig& cfg);
ProjectConfig load_config(const std::string& path);

struct PipelineReport {
  FitResult fit;
  bool fitted = false;  // false when free_params is empty
  bool net_trained = false;
  TrainMetrics net_metrics;
  std::optional<CopScanResult> cop;
  std::vector<BoilerRelationPoint> boiler_curve;
  std::vector<std::string> interpretation;
  std::vector<std::string> manifest;  // files written under the out dir
};

std::string report_to_json(const PipelineReport& report);

// One plain-language line per scale parameter plus the active TFs.
std::vector<std::string> interpret(const ShellParameters& params);

// Honors EPE_THREADS (positive integer) as an OpenMP thread cap.
void apply_thread_cap();

// The config's weather/measured inputs, loading files or synthesizing per
// the "synthesize" markers. Used by the CLI verbs that re-run single stages.
WeatherSeries weather_for(const ProjectConfig& cfg);
MeasuredDataset measured_for(const ProjectConfig& cfg,
                             const WeatherSeries& weather);

// Five-run decomposition over one stage window, with ventilation and
// infiltration estimates attached when derivable.
HeatFlowSet decompose_stage(const BuildingModel& audit,
                            const MeasuredDataset& data,
                            const ProjectConfig& cfg, const Interval& window);

// Decomposition -> linear fit -> optional TF fit -> optional residual net ->
// corrective flow -> optional stage 2, writing artifacts into out_dir.
PipelineReport run_pipeline(const ProjectConfig& cfg,
                            const std::string& out_dir, bool verbose = false);

}  // namespace epe
