#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "epe/io.hpp"
#include "epe/pipeline.hpp"
#include "epe/synth.hpp"

using namespace epe;
namespace fs = std::filesystem;

namespace {

const Time t0 = civil_to_time(2024, 6, 1);

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("epe_pipeline_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A complete synthetic project on disk; returns the config.
ProjectConfig synthetic_project(const fs::path& dir, int stage1_days,
                                const synth::Perturbation& pert = {}) {
  const BuildingModel audit = synth::make_office("audit");
  const BuildingModel real = synth::perturb(audit, pert, "real");
  io::save_building((dir / "audit.json").string(), audit);
  io::save_building((dir / "real.json").string(), real);

  ProjectConfig cfg;
  cfg.building_file = (dir / "audit.json").string();
  cfg.real_building_file = (dir / "real.json").string();
  cfg.weather_file = "synthesize";
  cfg.measured_data = "synthesize";
  cfg.stage1_window = {t0, t0 + static_cast<Time>(stage1_days) * 24 * kHour};
  cfg.free_params = {"p_blc", "p_in", "p_sun", "p_lep"};
  cfg.train_net = false;
  return cfg;
}

}  // namespace

TEST_CASE("building json round trip") {
  const BuildingModel office = synth::make_office();
  const std::string text = io::building_to_json(office);
  const BuildingModel back = io::building_from_json(text);
  CHECK(back.name == office.name);
  CHECK(back.zones.size() == 1);
  CHECK(back.zones[0].surfaces.size() == office.zones[0].surfaces.size());
  CHECK(back.zones[0].windows[2].shgc == office.zones[0].windows[2].shgc);
  // Serialization is stable: a second round trip is byte-identical.
  CHECK(io::building_to_json(back) == text);
}

TEST_CASE("building json errors name the offending component") {
  BuildingModel bad = synth::make_office();
  bad.zones[0].surfaces[1].layers[1].conductivity = -0.04;
  const std::string text = io::building_to_json(bad);
  CHECK_THROWS_WITH_AS(io::building_from_json(text),
                       doctest::Contains("surface 'wall-e' layer 1"),
                       DataError);
  CHECK_THROWS_AS(io::building_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(io::building_from_json("{\"schema_version\": 99}"),
                  ConfigError);
}

TEST_CASE("weather csv round trip and malformed input errors") {
  const fs::path dir = fresh_dir("weather");
  const WeatherSeries wx =
      synth::make_weather(t0, 48, synth::temperate_climate());
  const std::string path = (dir / "weather.csv").string();
  io::save_weather(path, wx);
  const WeatherSeries back = io::load_weather(path);
  REQUIRE(back.t_out.size() == 48);
  for (std::size_t k = 0; k < 48; ++k) {
    CHECK(back.t_out[k] == wx.t_out[k]);  // %.17g survives the round trip
    CHECK(back.dni[k] == wx.dni[k]);
  }

  SUBCASE("duplicated timestamps are reported with the row number") {
    std::ofstream out(dir / "dup.csv");
    out << "timestamp,t_out,ghi,dni,dhi,wind_speed,humidity_ratio\n"
        << "2024-06-01T00:00:00,20,0,0,0,3,0.01\n"
        << "2024-06-01T01:00:00,20,0,0,0,3,0.01\n"
        << "2024-06-01T01:00:00,21,0,0,0,3,0.01\n";
    out.close();
    CHECK_THROWS_WITH_AS(io::load_weather((dir / "dup.csv").string()),
                         doctest::Contains("row 4"), DataError);
    CHECK_THROWS_WITH_AS(io::load_weather((dir / "dup.csv").string()),
                         doctest::Contains("duplicated timestamp"), DataError);
  }
  SUBCASE("missing column") {
    std::ofstream out(dir / "short.csv");
    out << "timestamp,t_out,ghi\n2024-06-01T00:00:00,20,0\n";
    out.close();
    CHECK_THROWS_WITH_AS(io::load_weather((dir / "short.csv").string()),
                         doctest::Contains("missing column"), DataError);
  }
  SUBCASE("unopenable path is a configuration error") {
    CHECK_THROWS_AS(io::load_weather((dir / "nope.csv").string()),
                    ConfigError);
  }
}

TEST_CASE("measured csv round trip") {
  const fs::path dir = fresh_dir("measured");
  const WeatherSeries wx =
      synth::make_weather(t0, 48, synth::temperate_climate());
  const BuildingModel office = synth::make_office();
  MeasuredDataset data = synth::synthesize_measurements(
      office, wx, synth::setpoint_schedule(t0, 48),
      synth::lep_schedule(t0, 48, 1000, 8000), wx.span());
  data.energy.emplace("electricity",
                      TimeSeries::constant(t0, kHour, 48, 5000.0, Unit::Watt));

  const std::string path = (dir / "measured.csv").string();
  io::save_measured(path, data);
  const MeasuredDataset back = io::load_measured(path, wx);
  REQUIRE(back.q_hc_measured.has_value());
  for (std::size_t k = 0; k < 48; ++k) {
    CHECK(back.t_in.at("main")[k] == data.t_in.at("main")[k]);
    CHECK((*back.q_hc_measured)[k] == (*data.q_hc_measured)[k]);
  }
  CHECK(back.energy.at("electricity")[7] == 5000.0);

  SUBCASE("unknown columns are rejected") {
    std::ofstream out(dir / "junk.csv");
    out << "timestamp,t_in:main,lep,q_hz\n2024-06-01T00:00:00,21,0,0\n";
    out.close();
    CHECK_THROWS_WITH_AS(io::load_measured((dir / "junk.csv").string(), wx),
                         doctest::Contains("unknown column 'q_hz'"),
                         DataError);
  }
}

TEST_CASE("fit json round trip") {
  FitResult fit;
  fit.params.p_blc = 1.48;
  fit.params.p_sun = 0.8;
  fit.params.tf["q_sun"] = {0.9, 0.3};
  fit.params.fixed = {"p_lep"};
  fit.params.sigma = {{"p_blc", 0.02}, {"alpha_sun", 0.01}};
  fit.params.covariance = Eigen::MatrixXd::Identity(2, 2) * 4e-4;
  fit.params.covariance_names = {"p_blc", "p_sun"};
  fit.report.rmse = 123.4;
  fit.report.before_rmse = 700.0;
  fit.report.lm_iterations = 17;
  fit.report.warnings = {"p_lep pinned to 1: collinear"};

  const FitResult back = io::fit_from_json(io::fit_to_json(fit));
  CHECK(back.params.p_blc == 1.48);
  CHECK(back.params.tf.at("q_sun").alpha == 0.9);
  CHECK(back.params.fixed.count("p_lep") == 1);
  CHECK(back.params.sigma.at("alpha_sun") == 0.01);
  CHECK(back.params.covariance(1, 1) == 4e-4);
  CHECK(back.report.rmse == 123.4);
  CHECK(back.report.lm_iterations == 17);
  CHECK(back.report.warnings == fit.report.warnings);
}

TEST_CASE("flows csv round trip") {
  const fs::path dir = fresh_dir("flows");
  HeatFlowSet flows;
  auto mk = [&](double base) {
    std::vector<double> v(30);
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = base + 0.123456789012345 * static_cast<double>(k);
    return TimeSeries(t0, kHour, std::move(v), Unit::Watt);
  };
  flows.q_blc = mk(-4000);
  flows.q_in = mk(300);
  flows.q_sun = mk(2000);
  flows.q_lep = mk(900);
  flows.q1 = mk(800);
  flows.q_inf = mk(-150);
  const std::string path = (dir / "flows.csv").string();
  io::save_flows(path, flows);
  const HeatFlowSet back = io::load_flows(path);
  REQUIRE(back.q_inf.has_value());
  for (std::size_t k = 0; k < 30; ++k) {
    CHECK(back.q_blc[k] == flows.q_blc[k]);
    CHECK(back.q1[k] == flows.q1[k]);
    CHECK((*back.q_inf)[k] == (*flows.q_inf)[k]);
  }
}

TEST_CASE("project config serialization is idempotent") {
  ProjectConfig cfg;
  cfg.building_file = "audit.json";
  cfg.real_building_file = "real.json";
  cfg.weather_file = "synthesize";
  cfg.measured_data = "synthesize";
  cfg.stage1_window = {t0, t0 + 60 * 24 * kHour};
  cfg.stage2_window = {t0 + 60 * 24 * kHour, t0 + 120 * 24 * kHour};
  cfg.free_params = {"p_blc", "p_sun"};
  cfg.active_tfs = {"q_sun"};
  cfg.hvac.kind = "dx";
  cfg.hvac.capacity = 200000.0;
  cfg.synth.climate = "hot-dry";
  cfg.seed = 42;

  const std::string once = config_to_json(cfg);
  const ProjectConfig parsed = config_from_json(once);
  CHECK(config_to_json(parsed) == once);
  CHECK(parsed.stage2_window.end == cfg.stage2_window.end);
  CHECK(parsed.hvac.kind == "dx");
  CHECK(parsed.free_params == cfg.free_params);
}

TEST_CASE("project config validation") {
  ProjectConfig cfg;
  cfg.building_file = "audit.json";
  cfg.weather_file = "synthesize";
  cfg.measured_data = "synthesize";
  cfg.stage1_window = {t0, t0 + 48 * kHour};

  SUBCASE("synthetic mode needs the real model") {
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         doctest::Contains("real_building_file"), ConfigError);
  }
  cfg.real_building_file = "real.json";
  SUBCASE("unknown parameter name") {
    cfg.free_params = {"p_bogus"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("unknown flow key") {
    cfg.active_tfs = {"q_bogus"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("unknown hvac kind") {
    cfg.hvac.kind = "chiller";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("partially overlapping stage windows") {
    cfg.stage2_window = {t0 + 24 * kHour, t0 + 96 * kHour};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("interpretation lines") {
  ShellParameters p;
  p.p_blc = 1.48;
  p.p_in = 0.63;
  p.p_lep = 1.0;
  p.fixed = {"p_lep"};
  p.sigma = {{"p_blc", 0.02}, {"p_in", 0.05}, {"p_sun", 0.03}};
  p.tf["q_sun"] = {0.9, 0.3};
  const std::vector<std::string> lines = interpret(p);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].find("p_blc = 1.48") != std::string::npos);
  CHECK(lines[0].find("about 48% higher") != std::string::npos);
  CHECK(lines[1].find("less effective thermal mass") != std::string::npos);
  CHECK(lines[2].find("consistent with audit") != std::string::npos);
  CHECK(lines[3].find("pinned at the audit value") != std::string::npos);
  CHECK(lines[4].find("q_sun transfer function") != std::string::npos);
}

TEST_CASE("pipeline runs are deterministic") {
  const fs::path dir = fresh_dir("determinism");
  ProjectConfig cfg = synthetic_project(dir, 35, {.conductivity_scale = 1.3});
  cfg.train_net = true;
  cfg.synth.noise_sigma = 0.01;

  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  const PipelineReport rep_a = run_pipeline(cfg, out_a.string());
  const PipelineReport rep_b = run_pipeline(cfg, out_b.string());
  CHECK(rep_a.fitted);
  CHECK(rep_a.net_trained);

  for (const char* name : {"report.json", "params.json", "net.json",
                           "flows.csv", "fit_before_after.csv"}) {
    CAPTURE(name);
    CHECK(io::read_file((out_a / name).string()) ==
          io::read_file((out_b / name).string()));
  }
}

TEST_CASE("pipeline without free parameters only reports the before stats") {
  const fs::path dir = fresh_dir("nofit");
  ProjectConfig cfg = synthetic_project(dir, 7);
  cfg.free_params.clear();
  const PipelineReport rep = run_pipeline(cfg, (dir / "out").string());
  CHECK_FALSE(rep.fitted);
  CHECK(rep.fit.report.before_rmse >= 0.0);
  CHECK(fs::exists(dir / "out" / "flows.csv"));
  CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("stage-2 dx scan recovers the generating cop") {
  const fs::path dir = fresh_dir("stage2");
  ProjectConfig cfg = synthetic_project(dir, 14);
  cfg.stage2_window = {t0 + 14 * 24 * kHour, t0 + 28 * 24 * kHour};
  cfg.synth.climate = "hot-dry";
  cfg.synth.true_cop = 3.5;
  cfg.hvac.kind = "dx";
  cfg.hvac.capacity = 200000.0;

  const PipelineReport rep = run_pipeline(cfg, (dir / "out").string());
  REQUIRE(rep.cop.has_value());
  CHECK(std::abs(rep.cop->best_cop - 3.5) <= 0.075);
  CHECK(fs::exists(dir / "out" / "cop_curve.csv"));
}

TEST_CASE("cli exit codes") {
  const fs::path cli = fs::path("..") / "epe";
  if (!fs::exists(cli)) {
    MESSAGE("cli binary not found next to the test dir; skipping");
    return;
  }
  const fs::path dir = fresh_dir("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd =
        cli.string() + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
  };

  CHECK(run("pipeline --config " + (dir / "missing.json").string()) == 2);

  // A config whose measured CSV has a duplicated timestamp: data error.
  ProjectConfig cfg = synthetic_project(dir, 7);
  cfg.weather_file = (dir / "weather.csv").string();
  cfg.measured_data = (dir / "measured.csv").string();
  io::save_weather(cfg.weather_file,
                   synth::make_weather(t0, 7 * 24,
                                       synth::temperate_climate()));
  {
    std::ofstream out(dir / "measured.csv");
    out << "timestamp,t_in:main,lep,q_hc\n"
        << "2024-06-01T00:00:00,21,0,0\n"
        << "2024-06-01T00:00:00,21,0,0\n";
  }
  io::write_file((dir / "config.json").string(), config_to_json(cfg));
  CHECK(run("pipeline --config " + (dir / "config.json").string()) == 3);

  // A healthy synthetic project exits cleanly.
  ProjectConfig ok = synthetic_project(dir, 7);
  io::write_file((dir / "ok.json").string(), config_to_json(ok));
  CHECK(run("pipeline --config " + (dir / "ok.json").string() + " --out " +
            (dir / "out").string()) == 0);
}
