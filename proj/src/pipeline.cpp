#include "epe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "epe/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace epe {

using nlohmann::json;

namespace {

Interval interval_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("begin") || !j.contains("end"))
    throw ConfigError(where + ": expected {\"begin\", \"end\"} timestamps");
  Interval w{parse_timestamp(j["begin"].get<std::string>()),
             parse_timestamp(j["end"].get<std::string>())};
  return w;
}

json interval_to_json(const Interval& w) {
  return json{{"begin", format_timestamp(w.begin)},
              {"end", format_timestamp(w.end)}};
}

template <class F>
auto stage(const std::string& name, bool verbose, F&& f) {
  if (verbose) std::cerr << "[" << name << "]" << std::endl;
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  }
}

HvacPlant make_plant(const HvacSettings& hv) {
  HvacPlant plant;
  plant.kind = hv.kind == "boiler" ? HvacPlant::Kind::Boiler
                                   : HvacPlant::Kind::DxCooling;
  plant.rated_cop = hv.rated_cop;
  plant.rated_efficiency = hv.rated_efficiency;
  plant.capacity = hv.capacity;
  plant.temp_curve = hv.kind == "dx" && hv.default_dx_curve
                         ? TempCurve::dx_default()
                         : TempCurve::unity();
  return plant;
}

Interval full_span(const ProjectConfig& cfg) {
  if (cfg.stage2_window.empty()) return cfg.stage1_window;
  return {std::min(cfg.stage1_window.begin, cfg.stage2_window.begin),
          std::max(cfg.stage1_window.end, cfg.stage2_window.end)};
}

std::string fmt_pct(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f", std::abs(p - 1.0) * 100.0);
  return buf;
}

std::string fmt_val(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void ProjectConfig::validate() const {
  if (building_file.empty()) throw ConfigError("config: building_file missing");
  if (weather_file.empty()) throw ConfigError("config: weather_file missing");
  if (measured_data.empty())
    throw ConfigError("config: measured_data missing");
  if (measured_data == "synthesize" && real_building_file.empty())
    throw ConfigError(
        "config: synthetic mode requires real_building_file");
  if (stage1_window.empty()) throw ConfigError("config: empty stage1_window");
  if (!stage2_window.empty()) {
    const bool shared = stage2_window.begin == stage1_window.begin &&
                        stage2_window.end == stage1_window.end;
    const bool disjoint = stage2_window.end <= stage1_window.begin ||
                          stage2_window.begin >= stage1_window.end;
    if (!shared && !disjoint)
      throw ConfigError(
          "config: stage windows must be disjoint or identical");
  }
  static const std::set<std::string> known_p{"p_blc", "p_in", "p_sun",
                                            "p_lep"};
  for (const std::string& p : free_params)
    if (!known_p.count(p))
      throw ConfigError("config: unknown free parameter '" + p + "'");
  for (const std::string& k : active_tfs)
    if (std::find(flow_keys().begin(), flow_keys().end(), k) ==
        flow_keys().end())
      throw ConfigError("config: unknown TF flow '" + k + "'");
  if (hvac.kind != "none" && hvac.kind != "dx" && hvac.kind != "boiler")
    throw ConfigError("config: hvac.kind must be none/dx/boiler");
  if (synth.climate != "temperate" && synth.climate != "hot-dry")
    throw ConfigError("config: synth.climate must be temperate/hot-dry");
}

ProjectConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("config JSON: unsupported schema_version");

  ProjectConfig cfg;
  cfg.building_file = j.value("building_file", "");
  cfg.real_building_file = j.value("real_building_file", "");
  cfg.weather_file = j.value("weather_file", "");
  cfg.measured_data = j.value("measured_data", "");
  if (j.contains("stage1_window"))
    cfg.stage1_window = interval_from_json(j["stage1_window"], "stage1_window");
  if (j.contains("stage2_window"))
    cfg.stage2_window = interval_from_json(j["stage2_window"], "stage2_window");
  if (j.contains("decomposition")) {
    const json& d = j["decomposition"];
    cfg.decomposition.t_fixed1 = d.value("t_fixed1", 20.0);
    cfg.decomposition.t_fixed2 = d.value("t_fixed2", 25.0);
  }
  cfg.free_params = j.value("free_params", std::vector<std::string>{});
  cfg.active_tfs = j.value("active_tfs", std::vector<std::string>{});
  cfg.train_net = j.value("train_net", true);
  if (j.contains("train")) {
    const json& t = j["train"];
    cfg.train.hidden = t.value("hidden", cfg.train.hidden);
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.learn_rate = t.value("learn_rate", cfg.train.learn_rate);
    cfg.train.momentum = t.value("momentum", cfg.train.momentum);
    cfg.train.validation_fraction =
        t.value("validation_fraction", cfg.train.validation_fraction);
    cfg.train.patience = t.value("patience", cfg.train.patience);
  }
  if (j.contains("hvac")) {
    const json& h = j["hvac"];
    cfg.hvac.kind = h.value("kind", cfg.hvac.kind);
    cfg.hvac.rated_cop = h.value("rated_cop", cfg.hvac.rated_cop);
    cfg.hvac.rated_efficiency =
        h.value("rated_efficiency", cfg.hvac.rated_efficiency);
    cfg.hvac.capacity = h.value("capacity", cfg.hvac.capacity);
    cfg.hvac.default_dx_curve =
        h.value("default_dx_curve", cfg.hvac.default_dx_curve);
    if (h.contains("cop_grid")) {
      const json& g = h["cop_grid"];
      cfg.hvac.cop_grid.lo = g.value("lo", cfg.hvac.cop_grid.lo);
      cfg.hvac.cop_grid.hi = g.value("hi", cfg.hvac.cop_grid.hi);
      cfg.hvac.cop_grid.step = g.value("step", cfg.hvac.cop_grid.step);
      cfg.hvac.cop_grid.refine = g.value("refine", cfg.hvac.cop_grid.refine);
    }
    cfg.hvac.p_blc_lo = h.value("p_blc_lo", cfg.hvac.p_blc_lo);
    cfg.hvac.p_blc_hi = h.value("p_blc_hi", cfg.hvac.p_blc_hi);
    cfg.hvac.p_blc_step = h.value("p_blc_step", cfg.hvac.p_blc_step);
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    cfg.synth.climate = s.value("climate", cfg.synth.climate);
    cfg.synth.setpoint_night =
        s.value("setpoint_night", cfg.synth.setpoint_night);
    cfg.synth.setpoint_day = s.value("setpoint_day", cfg.synth.setpoint_day);
    cfg.synth.lep_base = s.value("lep_base", cfg.synth.lep_base);
    cfg.synth.lep_peak = s.value("lep_peak", cfg.synth.lep_peak);
    cfg.synth.noise_sigma = s.value("noise_sigma", cfg.synth.noise_sigma);
    cfg.synth.true_cop = s.value("true_cop", cfg.synth.true_cop);
  }
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ProjectConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["building_file"] = cfg.building_file;
  if (!cfg.real_building_file.empty())
    j["real_building_file"] = cfg.real_building_file;
  j["weather_file"] = cfg.weather_file;
  j["measured_data"] = cfg.measured_data;
  j["stage1_window"] = interval_to_json(cfg.stage1_window);
  if (!cfg.stage2_window.empty())
    j["stage2_window"] = interval_to_json(cfg.stage2_window);
  j["decomposition"] = json{{"t_fixed1", cfg.decomposition.t_fixed1},
                            {"t_fixed2", cfg.decomposition.t_fixed2}};
  j["free_params"] = cfg.free_params;
  j["active_tfs"] = cfg.active_tfs;
  j["train_net"] = cfg.train_net;
  j["train"] = json{{"hidden", cfg.train.hidden},
                    {"max_epochs", cfg.train.max_epochs},
                    {"learn_rate", cfg.train.learn_rate},
                    {"momentum", cfg.train.momentum},
                    {"validation_fraction", cfg.train.validation_fraction},
                    {"patience", cfg.train.patience}};
  j["hvac"] = json{{"kind", cfg.hvac.kind},
                   {"rated_cop", cfg.hvac.rated_cop},
                   {"rated_efficiency", cfg.hvac.rated_efficiency},
                   {"capacity", cfg.hvac.capacity},
                   {"default_dx_curve", cfg.hvac.default_dx_curve},
                   {"cop_grid", json{{"lo", cfg.hvac.cop_grid.lo},
                                     {"hi", cfg.hvac.cop_grid.hi},
                                     {"step", cfg.hvac.cop_grid.step},
                                     {"refine", cfg.hvac.cop_grid.refine}}},
                   {"p_blc_lo", cfg.hvac.p_blc_lo},
                   {"p_blc_hi", cfg.hvac.p_blc_hi},
                   {"p_blc_step", cfg.hvac.p_blc_step}};
  j["synth"] = json{{"climate", cfg.synth.climate},
                    {"setpoint_night", cfg.synth.setpoint_night},
                    {"setpoint_day", cfg.synth.setpoint_day},
                    {"lep_base", cfg.synth.lep_base},
                    {"lep_peak", cfg.synth.lep_peak},
                    {"noise_sigma", cfg.synth.noise_sigma},
                    {"true_cop", cfg.synth.true_cop}};
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

ProjectConfig load_config(const std::string& path) {
  try {
    return config_from_json(io::read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> interpret(const ShellParameters& params) {
  struct Entry {
    const char* name;
    const char* what;
    double value;
  };
  const Entry entries[] = {
      {"p_blc", "building load coefficient", params.p_blc},
      {"p_in", "thermal mass", params.p_in},
      {"p_sun", "solar gains", params.p_sun},
      {"p_lep", "internal gains", params.p_lep},
  };
  std::vector<std::string> lines;
  for (const Entry& e : entries) {
    std::ostringstream line;
    line << e.name << " = " << fmt_val(e.value);
    const auto it = params.sigma.find(e.name);
    const double sigma = it != params.sigma.end() ? it->second : 0.0;
    if (sigma > 0.0) line << " +- " << fmt_val(sigma);
    line << ": ";
    if (params.fixed.count(e.name)) {
      line << "pinned at the audit value";
    } else if (std::abs(e.value - 1.0) <= std::max(1e-6, sigma)) {
      line << "consistent with audit";
    } else if (std::string(e.name) == "p_in") {
      line << (e.value < 1.0 ? "less" : "more")
           << " effective thermal mass than audit";
    } else {
      line << e.what << " about " << fmt_pct(e.value) << "% "
           << (e.value > 1.0 ? "higher" : "lower") << " than audit";
    }
    lines.push_back(line.str());
  }
  for (const auto& [key, tf] : params.tf) {
    std::ostringstream line;
    line << key << " transfer function: alpha = " << fmt_val(tf.alpha)
         << ", beta = " << fmt_val(tf.beta)
         << ": time profile reshaped beyond pure scaling";
    lines.push_back(line.str());
  }
  return lines;
}

void apply_thread_cap() {
  const char* env = std::getenv("EPE_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n <= 0)
    throw ConfigError(std::string("EPE_THREADS: expected a positive "
                                  "integer, got '") +
                      env + "'");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

WeatherSeries weather_for(const ProjectConfig& cfg) {
  if (cfg.weather_file != "synthesize")
    return io::load_weather(cfg.weather_file);
  const Interval full = full_span(cfg);
  const synth::WeatherParams wp = cfg.synth.climate == "hot-dry"
                                      ? synth::hot_dry_climate()
                                      : synth::temperate_climate();
  return synth::make_weather(
      full.begin, static_cast<std::size_t>(full.length() / kHour), wp);
}

MeasuredDataset measured_for(const ProjectConfig& cfg,
                             const WeatherSeries& weather) {
  if (cfg.measured_data != "synthesize")
    return io::load_measured(cfg.measured_data, weather);
  const BuildingModel real = io::load_building(cfg.real_building_file);
  const Interval full = full_span(cfg);
  const std::size_t hours = static_cast<std::size_t>(full.length() / kHour);
  const TimeSeries setpoints = synth::setpoint_schedule(
      full.begin, hours, cfg.synth.setpoint_night, cfg.synth.setpoint_day);
  const TimeSeries lep = synth::lep_schedule(full.begin, hours,
                                             cfg.synth.lep_base,
                                             cfg.synth.lep_peak);
  MeasuredDataset d = synth::synthesize_measurements(
      real, weather, setpoints, lep, full, cfg.synth.noise_sigma, cfg.seed);
  if (cfg.hvac.kind == "dx" && !cfg.stage2_window.empty()) {
    HvacSettings hv = cfg.hvac;
    hv.rated_cop = cfg.synth.true_cop;
    const ProcessLoadBox box{d.q_hc_measured->slice(cfg.stage2_window),
                             make_plant(hv)};
    d.energy.emplace("electricity", plant_energy(box, weather).energy);
  }
  return d;
}

HeatFlowSet decompose_stage(const BuildingModel& audit,
                            const MeasuredDataset& data,
                            const ProjectConfig& cfg, const Interval& window) {
  DecompositionConfig dcfg = cfg.decomposition;
  dcfg.window = window;
  HeatFlowSet flows = heat_flows(run_five(audit, data, dcfg), data, dcfg);
  const VentInfilFlows vf = vent_infil_flows(audit, data);
  if (vf.q_vent) flows.q_vent = vf.q_vent->slice(window);
  if (vf.q_inf) flows.q_inf = vf.q_inf->slice(window);
  return flows;
}

std::string report_to_json(const PipelineReport& report) {
  json j;
  j["schema_version"] = 1;
  if (report.fitted) {
    // Reuse the fit serialization for the parameter/report blocks.
    j.update(json::parse(io::fit_to_json(report.fit)));
    j["schema_version"] = 1;
  } else {
    j["report"] = json{{"before_mbe", report.fit.report.before_mbe},
                       {"before_rmse", report.fit.report.before_rmse},
                       {"n_obs", report.fit.report.n_obs}};
  }
  if (report.net_trained)
    j["net"] = json{{"train_rmse", report.net_metrics.train_rmse},
                    {"validation_rmse", report.net_metrics.validation_rmse},
                    {"epochs_run", report.net_metrics.epochs_run}};
  if (report.cop)
    j["hvac"] = json{{"best_cop", report.cop->best_cop},
                     {"best_rmse", report.cop->best_rmse}};
  if (!report.boiler_curve.empty()) {
    json curve = json::array();
    for (const BoilerRelationPoint& p : report.boiler_curve)
      curve.push_back(json{{"p_blc", p.p_blc},
                           {"efficiency", p.p_boiler_eff},
                           {"sigma", p.sigma}});
    j["boiler_curve"] = std::move(curve);
  }
  j["interpretation"] = report.interpretation;
  j["manifest"] = report.manifest;
  return j.dump(2) + "\n";
}

PipelineReport run_pipeline(const ProjectConfig& cfg,
                            const std::string& out_dir, bool verbose) {
  cfg.validate();
  apply_thread_cap();
  std::filesystem::create_directories(out_dir);
  PipelineReport report;
  auto emit = [&](const std::string& name, auto&& writer) {
    writer(out_dir + "/" + name);
    report.manifest.push_back(name);
  };

  const BuildingModel audit =
      stage("load-building", verbose,
            [&] { return io::load_building(cfg.building_file); });

  const WeatherSeries weather =
      stage("load-weather", verbose, [&] { return weather_for(cfg); });

  MeasuredDataset data = stage("load-measured", verbose,
                               [&] { return measured_for(cfg, weather); });

  if (!data.q_hc_measured)
    throw DataError("pipeline: measured q_hc required for stage 1");

  const HeatFlowSet flows = stage("decompose", verbose, [&] {
    return decompose_stage(audit, data, cfg, cfg.stage1_window);
  });
  emit("flows.csv", [&](const std::string& p) { io::save_flows(p, flows); });

  const TimeSeries q_hc = data.q_hc_measured->slice(flows.q1.span());

  ShellParameters params;  // all 1 when no fit is requested
  if (cfg.free_params.empty()) {
    const TimeSeries r = balance_residual(flows, q_hc, params);
    const std::size_t burn = burn_in_steps(r);
    report.fit.report.before_mbe = tail_mean(r, burn);
    report.fit.report.before_rmse = tail_rms(r, burn);
    report.fit.report.n_obs = r.size() - burn;
  } else {
    report.fit = stage("fit", verbose, [&] {
      const std::set<std::string> free_set(cfg.free_params.begin(),
                                           cfg.free_params.end());
      FitResult fit = fit_linear(flows, q_hc, free_set);
      if (!cfg.active_tfs.empty()) {
        const std::set<std::string> tfs(cfg.active_tfs.begin(),
                                        cfg.active_tfs.end());
        fit = fit_nonlinear(flows, q_hc, tfs, fit.params);
      }
      return fit;
    });
    report.fitted = true;
    params = report.fit.params;
    emit("params.json", [&](const std::string& p) {
      io::write_file(p, io::fit_to_json(report.fit));
    });
  }

  ResidualNet net;
  if (report.fitted && cfg.train_net) {
    const TrainedNet trained = stage("train-net", verbose, [&] {
      TrainConfig tc = cfg.train;
      tc.seed = cfg.seed;
      return train_residual_net(residual_net_input_series(flows, params),
                                residual_net_inputs(),
                                report.fit.report.residuals, tc);
    });
    net = trained.net;
    report.net_trained = true;
    report.net_metrics = trained.metrics;
    emit("net.json", [&](const std::string& p) {
      io::write_file(p, net_to_json(net));
    });
  }

  stage("emit-plots", verbose, [&] {
    const TimeSeries before = flows.q1;
    const TimeSeries after = reconciled_load(flows, params);
    const TimeSeries after_net =
        report.net_trained ? reconciled_load(flows, params, &net) : after;
    emit("fit_before_after.csv", [&](const std::string& p) {
      io::save_series_csv(p, {q_hc, before, after, after_net},
                          {"measured", "before", "after", "after_net"});
    });
    emit("scatter.csv", [&](const std::string& p) {
      io::save_series_csv(p, {q_hc, after_net}, {"measured", "predicted"});
    });
    if (report.fitted)
      emit("corrective_flow.csv", [&](const std::string& p) {
        io::save_series_csv(p, {corrective_flow(flows, params)},
                            {"corrective_flow"});
      });
    return 0;
  });

  if (cfg.hvac.kind != "none" && !cfg.stage2_window.empty()) {
    stage("stage2", verbose, [&] {
      const HeatFlowSet flows2 =
          decompose_stage(audit, data, cfg, cfg.stage2_window);
      const TimeSeries load =
          reconciled_load(flows2, params, report.net_trained ? &net : nullptr);
      if (cfg.hvac.kind == "dx") {
        const auto it = data.energy.find("electricity");
        if (it == data.energy.end())
          throw DataError("stage 2 needs an energy:electricity series");
        const TimeSeries e = it->second.slice(load.span());
        const ProcessLoadBox box{load, make_plant(cfg.hvac)};
        report.cop = estimate_cop(box, weather, e, cfg.hvac.cop_grid);
        emit("cop_curve.csv", [&](const std::string& p) {
          std::ostringstream out;
          out << "cop,rmse\n";
          for (std::size_t i = 0; i < report.cop->grid.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n",
                          report.cop->grid[i], report.cop->rmse[i]);
            out << buf;
          }
          io::write_file(p, out.str());
        });
      } else {
        const auto it = data.energy.find("gas");
        if (it == data.energy.end())
          throw DataError("stage 2 needs an energy:gas series");
        const TimeSeries gas = it->second.slice(flows2.q_blc.span());
        double peak = 0.0;
        for (std::size_t k = 0; k < flows2.q_blc.size(); ++k)
          peak = std::max(peak, std::abs(flows2.q_blc[k]));
        std::vector<Interval> windows =
            select_window(flows2, "q_blc",
                          {{"q_blc", 0.5 * peak},
                           {"q_sun", 0.25 * peak},
                           {"q_in", 0.25 * peak},
                           {"q_lep", 0.25 * peak}});
        if (windows.empty()) windows.push_back(flows2.q_blc.span());
        std::vector<double> grid;
        for (double p = cfg.hvac.p_blc_lo; p <= cfg.hvac.p_blc_hi + 1e-9;
             p += cfg.hvac.p_blc_step)
          grid.push_back(p);
        report.boiler_curve =
            boiler_blc_relation(flows2, gas, windows, grid);
        emit("boiler_curve.csv", [&](const std::string& p) {
          std::ostringstream out;
          out << "p_blc,efficiency,sigma\n";
          for (const BoilerRelationPoint& pt : report.boiler_curve) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pt.p_blc,
                          pt.p_boiler_eff, pt.sigma);
            out << buf;
          }
          io::write_file(p, out.str());
        });
      }
      return 0;
    });
  }

  report.interpretation = interpret(params);
  emit("report.json", [&](const std::string& p) {
    io::write_file(p, report_to_json(report));
  });
  return report;
}

}  // namespace epe
