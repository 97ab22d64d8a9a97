#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <set>

#include "epe/io.hpp"
#include "epe/pipeline.hpp"

namespace {

using namespace epe;

struct Options {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;  // 0 = keep the config's seed
  bool verbose = false;
};

ProjectConfig load(const Options& opt) {
  ProjectConfig cfg = load_config(opt.config);
  if (opt.seed != 0) cfg.seed = opt.seed;
  return cfg;
}

std::string path_in_out(const Options& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out);
  return opt.out + "/" + name;
}

// Track-mode run of the audit model against the measured setpoints.
void cmd_simulate(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const BuildingModel audit = io::load_building(cfg.building_file);
  const WeatherSeries weather = weather_for(cfg);
  const MeasuredDataset data = measured_for(cfg, weather);

  RunSpec spec;
  spec.mode = RunSpec::Mode::TrackSetpoints;
  spec.weather = weather;
  spec.window = cfg.stage1_window;
  spec.lep = split_lep(audit, data.lep);
  for (const Zone& z : audit.zones) {
    auto it = data.t_in.find(z.name);
    if (it == data.t_in.end())
      throw DataError("no measured t_in for zone '" + z.name + "'");
    spec.setpoints.emplace(z.name, it->second);
  }
  const RunResult run = simulate(discretize(audit), spec);
  io::save_series_csv(path_in_out(opt, "simulated_load.csv"),
                      {run.total_ideal_load()}, {"ideal_load"});
  if (opt.verbose)
    std::cerr << "wrote " << opt.out << "/simulated_load.csv" << std::endl;
}

void cmd_synthesize(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const WeatherSeries weather = weather_for(cfg);
  const MeasuredDataset data = measured_for(cfg, weather);
  io::save_weather(path_in_out(opt, "weather.csv"), weather);
  io::save_measured(path_in_out(opt, "measured.csv"), data);
  if (opt.verbose)
    std::cerr << "wrote " << opt.out << "/{weather.csv,measured.csv}"
              << std::endl;
}

HeatFlowSet stage1_flows(const ProjectConfig& cfg, const Options& opt,
                         const MeasuredDataset& data) {
  const std::string path = opt.out + "/flows.csv";
  if (std::filesystem::exists(path)) return io::load_flows(path);
  const BuildingModel audit = io::load_building(cfg.building_file);
  const HeatFlowSet flows =
      decompose_stage(audit, data, cfg, cfg.stage1_window);
  io::save_flows(path, flows);
  return flows;
}

void cmd_decompose(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const BuildingModel audit = io::load_building(cfg.building_file);
  const WeatherSeries weather = weather_for(cfg);
  const MeasuredDataset data = measured_for(cfg, weather);
  const HeatFlowSet flows =
      decompose_stage(audit, data, cfg, cfg.stage1_window);
  io::save_flows(path_in_out(opt, "flows.csv"), flows);
  if (opt.verbose) std::cerr << "wrote " << opt.out << "/flows.csv"
                             << std::endl;
}

void cmd_fit(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const WeatherSeries weather = weather_for(cfg);
  const MeasuredDataset data = measured_for(cfg, weather);
  if (!data.q_hc_measured) throw DataError("fit: measured q_hc required");
  const HeatFlowSet flows = stage1_flows(cfg, opt, data);
  const TimeSeries q_hc = data.q_hc_measured->slice(flows.q1.span());

  const std::set<std::string> free_set(cfg.free_params.begin(),
                                       cfg.free_params.end());
  FitResult fit = fit_linear(flows, q_hc, free_set);
  if (!cfg.active_tfs.empty()) {
    const std::set<std::string> tfs(cfg.active_tfs.begin(),
                                    cfg.active_tfs.end());
    fit = fit_nonlinear(flows, q_hc, tfs, fit.params);
  }
  io::write_file(path_in_out(opt, "params.json"), io::fit_to_json(fit));
  if (opt.verbose) std::cerr << "wrote " << opt.out << "/params.json"
                             << std::endl;
}

void cmd_train_residuals(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const WeatherSeries weather = weather_for(cfg);
  const MeasuredDataset data = measured_for(cfg, weather);
  if (!data.q_hc_measured)
    throw DataError("train-residuals: measured q_hc required");
  const HeatFlowSet flows = stage1_flows(cfg, opt, data);
  const FitResult fit =
      io::fit_from_json(io::read_file(opt.out + "/params.json"));
  const TimeSeries q_hc = data.q_hc_measured->slice(flows.q1.span());
  const TimeSeries residuals = balance_residual(flows, q_hc, fit.params);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainedNet trained =
      train_residual_net(residual_net_input_series(flows, fit.params),
                         residual_net_inputs(), residuals, tc);
  io::write_file(path_in_out(opt, "net.json"), net_to_json(trained.net));
  if (opt.verbose)
    std::cerr << "wrote " << opt.out << "/net.json (validation rmse "
              << trained.metrics.validation_rmse << ")" << std::endl;
}

void cmd_stage2(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  if (cfg.stage2_window.empty())
    throw ConfigError("stage2: config has no stage2_window");
  // Re-runs decomposition over the stage-2 window with the saved parameters;
  // delegating to the full pipeline keeps the artifacts consistent.
  ProjectConfig run = cfg;
  run.train_net = std::filesystem::exists(opt.out + "/net.json")
                      ? run.train_net
                      : false;
  run_pipeline(run, opt.out, opt.verbose);
}

void cmd_pipeline(const Options& opt) {
  const ProjectConfig cfg = load(opt);
  const PipelineReport report = run_pipeline(cfg, opt.out, opt.verbose);
  for (const std::string& line : report.interpretation)
    std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building energy model reconciliation toolkit"};
  app.require_subcommand(1);

  Options opt;
  std::string verb;
  for (const auto& [name, help] :
       std::vector<std::pair<std::string, std::string>>{
           {"simulate", "Run the audit model against measured setpoints"},
           {"decompose", "Extract the macro heat flows"},
           {"fit", "Estimate the shell parameters"},
           {"train-residuals", "Train the residual network"},
           {"stage2", "Estimate plant performance from reconciled loads"},
           {"pipeline", "Run every stage end to end"},
           {"synthesize", "Write synthetic weather and measured data"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Project config JSON")
        ->required();
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_flag("--verbose", opt.verbose, "Progress on stderr");
    sub->callback([&verb, name] { verb = name; });
  }

  try {
    app.parse(argc, argv);
    epe::apply_thread_cap();
    if (verb == "simulate") cmd_simulate(opt);
    else if (verb == "decompose") cmd_decompose(opt);
    else if (verb == "fit") cmd_fit(opt);
    else if (verb == "train-residuals") cmd_train_residuals(opt);
    else if (verb == "stage2") cmd_stage2(opt);
    else if (verb == "pipeline") cmd_pipeline(opt);
    else if (verb == "synthesize") cmd_synthesize(opt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const epe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const epe::DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return 3;
  } catch (const epe::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return 4;
  }
  return 0;
}
