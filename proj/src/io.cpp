#include "epe/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace epe::io {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t row) {
  if (cell.empty() || cell == "nan" || cell == "NaN")
    return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ": row " + std::to_string(row) +
                    ": cannot parse number '" + cell + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  Time start = 0;
  Time step = kHour;
  std::vector<std::vector<double>> columns;  // per non-timestamp header

  std::size_t rows() const {
    return columns.empty() ? 0 : columns.front().size();
  }
};

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  table.header = split_csv_line(line);
  if (table.header.empty() || table.header.front() != "timestamp")
    throw DataError(path + ": first column must be 'timestamp'");
  table.header.erase(table.header.begin());
  table.columns.resize(table.header.size());

  Time prev = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != table.header.size() + 1)
      throw DataError(path + ": row " + std::to_string(row) + ": expected " +
                      std::to_string(table.header.size() + 1) +
                      " cells, got " + std::to_string(cells.size()));
    Time t;
    try {
      t = parse_timestamp(cells[0]);
    } catch (const std::exception& e) {
      throw DataError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (table.rows() == 0) {
      table.start = t;
    } else if (t == prev) {
      throw DataError(path + ": row " + std::to_string(row) +
                      ": duplicated timestamp " + cells[0]);
    } else if (t < prev) {
      throw DataError(path + ": row " + std::to_string(row) +
                      ": timestamps not increasing at " + cells[0]);
    } else if (table.rows() == 1) {
      table.step = t - prev;
    } else if (t - prev != table.step) {
      throw DataError(path + ": row " + std::to_string(row) +
                      ": irregular timestamp spacing at " + cells[0]);
    }
    prev = t;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      table.columns[c].push_back(parse_cell(cells[c + 1], path, row));
  }
  if (table.rows() == 0) throw DataError(path + ": no data rows");
  return table;
}

const std::vector<double>& column(const CsvTable& t, const std::string& name,
                                  const std::string& path) {
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c] == name) return t.columns[c];
  throw DataError(path + ": missing column '" + name + "'");
}

json orientation_to_json(const Orientation& o) {
  return json{{"azimuth", o.azimuth}, {"tilt", o.tilt}};
}

Orientation orientation_from_json(const json& j) {
  return {j.value("azimuth", 180.0), j.value("tilt", 90.0)};
}

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(where + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& key,
                           const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string building_to_json(const BuildingModel& model) {
  json j;
  j["schema_version"] = 1;
  j["name"] = model.name;
  j["latitude"] = model.latitude;
  j["zones"] = json::array();
  for (const Zone& z : model.zones) {
    json jz{{"name", z.name},
            {"air_capacitance", z.air_capacitance},
            {"volume", z.volume},
            {"infiltration_ach", z.infiltration_ach},
            {"solar_to_air_fraction", z.solar_to_air_fraction},
            {"lep_radiative_fraction", z.lep_radiative_fraction}};
    jz["surfaces"] = json::array();
    for (const Surface& s : z.surfaces) {
      json js{{"name", s.name},
              {"area", s.area},
              {"exterior", s.exterior},
              {"solar_absorptance", s.solar_absorptance},
              {"exterior_film", s.exterior_film},
              {"interior_film", s.interior_film},
              {"solar_gain_share", s.solar_gain_share},
              {"orientation", orientation_to_json(s.orientation)}};
      js["layers"] = json::array();
      for (const Layer& l : s.layers)
        js["layers"].push_back(json{{"thickness", l.thickness},
                                    {"conductivity", l.conductivity},
                                    {"density", l.density},
                                    {"specific_heat", l.specific_heat}});
      jz["surfaces"].push_back(std::move(js));
    }
    jz["windows"] = json::array();
    for (const Window& w : z.windows)
      jz["windows"].push_back(json{{"name", w.name},
                                   {"area", w.area},
                                   {"u_value", w.u_value},
                                   {"shgc", w.shgc},
                                   {"orientation",
                                    orientation_to_json(w.orientation)}});
    j["zones"].push_back(std::move(jz));
  }
  return j.dump(2) + "\n";
}

BuildingModel building_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("building JSON: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("building JSON: unsupported schema_version");

  BuildingModel model;
  model.name = require_string(j, "name", "building");
  model.latitude = j.value("latitude", 40.0);
  for (const json& jz : j.value("zones", json::array())) {
    Zone z;
    z.name = require_string(jz, "name", "zone");
    const std::string where = "zone '" + z.name + "'";
    z.air_capacitance = require_number(jz, "air_capacitance", where);
    z.volume = require_number(jz, "volume", where);
    z.infiltration_ach = jz.value("infiltration_ach", 0.0);
    z.solar_to_air_fraction = jz.value("solar_to_air_fraction", 0.0);
    z.lep_radiative_fraction = jz.value("lep_radiative_fraction", 0.0);
    for (const json& js : jz.value("surfaces", json::array())) {
      Surface s;
      s.name = require_string(js, "name", where + " surface");
      const std::string swhere = where + " surface '" + s.name + "'";
      s.area = require_number(js, "area", swhere);
      s.exterior = js.value("exterior", true);
      s.solar_absorptance = js.value("solar_absorptance", 0.6);
      s.exterior_film = js.value("exterior_film", 25.0);
      s.interior_film = js.value("interior_film", 7.7);
      s.solar_gain_share = js.value("solar_gain_share", 0.0);
      if (js.contains("orientation"))
        s.orientation = orientation_from_json(js["orientation"]);
      for (const json& jl : js.value("layers", json::array())) {
        Layer l;
        l.thickness = require_number(jl, "thickness", swhere + " layer");
        l.conductivity = require_number(jl, "conductivity", swhere + " layer");
        l.density = require_number(jl, "density", swhere + " layer");
        l.specific_heat =
            require_number(jl, "specific_heat", swhere + " layer");
        s.layers.push_back(l);
      }
      z.surfaces.push_back(std::move(s));
    }
    for (const json& jw : jz.value("windows", json::array())) {
      Window w;
      w.name = require_string(jw, "name", where + " window");
      const std::string wwhere = where + " window '" + w.name + "'";
      w.area = require_number(jw, "area", wwhere);
      w.u_value = require_number(jw, "u_value", wwhere);
      w.shgc = require_number(jw, "shgc", wwhere);
      if (jw.contains("orientation"))
        w.orientation = orientation_from_json(jw["orientation"]);
      z.windows.push_back(std::move(w));
    }
    model.zones.push_back(std::move(z));
  }
  model.validate();
  return model;
}

BuildingModel load_building(const std::string& path) {
  try {
    return building_from_json(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_building(const std::string& path, const BuildingModel& model) {
  write_file(path, building_to_json(model));
}

WeatherSeries load_weather(const std::string& path) {
  const CsvTable t = read_csv(path);
  auto series = [&](const std::string& name, Unit unit) {
    TimeSeries s(t.start, t.step, column(t, name, path), unit);
    return fill_gaps(s);
  };
  WeatherSeries wx{series("t_out", Unit::Celsius),
                   series("ghi", Unit::WattPerSquareMeter),
                   series("dni", Unit::WattPerSquareMeter),
                   series("dhi", Unit::WattPerSquareMeter),
                   series("wind_speed", Unit::MetersPerSecond),
                   series("humidity_ratio", Unit::Dimensionless)};
  wx.validate();
  return wx;
}

void save_weather(const std::string& path, const WeatherSeries& weather) {
  save_series_csv(path,
                  {weather.t_out, weather.ghi, weather.dni, weather.dhi,
                   weather.wind_speed, weather.humidity_ratio},
                  {"t_out", "ghi", "dni", "dhi", "wind_speed",
                   "humidity_ratio"});
}

MeasuredDataset load_measured(const std::string& path,
                              const WeatherSeries& weather) {
  const CsvTable t = read_csv(path);
  MeasuredDataset data;
  data.weather = weather;
  bool have_lep = false;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& name = t.header[c];
    auto series = [&](Unit unit) {
      return fill_gaps(TimeSeries(t.start, t.step, t.columns[c], unit));
    };
    if (name.rfind("t_in:", 0) == 0) {
      data.t_in.emplace(name.substr(5), series(Unit::Celsius));
    } else if (name == "lep") {
      data.lep = series(Unit::Watt);
      have_lep = true;
    } else if (name == "q_hc") {
      data.q_hc_measured = series(Unit::Watt);
    } else if (name.rfind("energy:", 0) == 0) {
      data.energy.emplace(name.substr(7), series(Unit::Watt));
    } else if (name == "fan_flow") {
      data.fan_flow = series(Unit::Dimensionless);
    } else if (name == "t_mixed") {
      data.t_mixed = series(Unit::Celsius);
    } else if (name == "t_return") {
      data.t_return = series(Unit::Celsius);
    } else {
      throw DataError(path + ": unknown column '" + name + "'");
    }
  }
  if (data.t_in.empty())
    throw DataError(path + ": no t_in:<zone> column");
  if (!have_lep) throw DataError(path + ": missing column 'lep'");
  return data;
}

void save_measured(const std::string& path, const MeasuredDataset& data) {
  std::vector<TimeSeries> cols;
  std::vector<std::string> names;
  for (const auto& [zone, s] : data.t_in) {
    cols.push_back(s);
    names.push_back("t_in:" + zone);
  }
  cols.push_back(data.lep);
  names.push_back("lep");
  if (data.q_hc_measured) {
    cols.push_back(*data.q_hc_measured);
    names.push_back("q_hc");
  }
  for (const auto& [fuel, s] : data.energy) {
    cols.push_back(s);
    names.push_back("energy:" + fuel);
  }
  if (data.fan_flow) {
    cols.push_back(*data.fan_flow);
    names.push_back("fan_flow");
  }
  if (data.t_mixed) {
    cols.push_back(*data.t_mixed);
    names.push_back("t_mixed");
  }
  if (data.t_return) {
    cols.push_back(*data.t_return);
    names.push_back("t_return");
  }
  save_series_csv(path, cols, names);
}

void save_flows(const std::string& path, const HeatFlowSet& flows) {
  std::vector<TimeSeries> cols{flows.q_blc, flows.q_in, flows.q_sun,
                               flows.q_lep, flows.q1};
  std::vector<std::string> names{"q_blc", "q_in", "q_sun", "q_lep", "q1"};
  if (flows.q_vent) {
    cols.push_back(*flows.q_vent);
    names.push_back("q_vent");
  }
  if (flows.q_inf) {
    cols.push_back(*flows.q_inf);
    names.push_back("q_inf");
  }
  save_series_csv(path, cols, names);
}

HeatFlowSet load_flows(const std::string& path) {
  const CsvTable t = read_csv(path);
  auto series = [&](const std::string& name) {
    return TimeSeries(t.start, t.step, column(t, name, path), Unit::Watt);
  };
  HeatFlowSet flows;
  flows.q_blc = series("q_blc");
  flows.q_in = series("q_in");
  flows.q_sun = series("q_sun");
  flows.q_lep = series("q_lep");
  flows.q1 = series("q1");
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] == "q_vent")
      flows.q_vent = TimeSeries(t.start, t.step, t.columns[c], Unit::Watt);
    if (t.header[c] == "q_inf")
      flows.q_inf = TimeSeries(t.start, t.step, t.columns[c], Unit::Watt);
  }
  return flows;
}

std::string fit_to_json(const FitResult& fit) {
  const ShellParameters& p = fit.params;
  json jp;
  jp["p_blc"] = p.p_blc;
  jp["p_in"] = p.p_in;
  jp["p_sun"] = p.p_sun;
  jp["p_lep"] = p.p_lep;
  jp["tf"] = json::object();
  for (const auto& [key, tf] : p.tf)
    jp["tf"][key] = json{{"alpha", tf.alpha}, {"beta", tf.beta}};
  jp["fixed"] = json::array();
  for (const std::string& f : p.fixed) jp["fixed"].push_back(f);
  jp["sigma"] = json::object();
  for (const auto& [name, s] : p.sigma) jp["sigma"][name] = s;
  jp["covariance_names"] = p.covariance_names;
  jp["covariance"] = json::array();
  for (Eigen::Index r = 0; r < p.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < p.covariance.cols(); ++c)
      row.push_back(p.covariance(r, c));
    jp["covariance"].push_back(std::move(row));
  }

  const FitReport& rep = fit.report;
  json jr{{"mbe", rep.mbe},
          {"rmse", rep.rmse},
          {"n_obs", rep.n_obs},
          {"n_params", rep.n_params},
          {"before_mbe", rep.before_mbe},
          {"before_rmse", rep.before_rmse},
          {"lm_iterations", rep.lm_iterations},
          {"warnings", rep.warnings}};

  json j{{"schema_version", 1},
         {"parameters", std::move(jp)},
         {"report", std::move(jr)}};
  return j.dump(2) + "\n";
}

FitResult fit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fit JSON: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw ConfigError("fit JSON: unsupported schema_version");

  FitResult fit;
  const json& jp = j.at("parameters");
  ShellParameters& p = fit.params;
  p.p_blc = jp.value("p_blc", 1.0);
  p.p_in = jp.value("p_in", 1.0);
  p.p_sun = jp.value("p_sun", 1.0);
  p.p_lep = jp.value("p_lep", 1.0);
  // Name the temporaries: .items() on an rvalue would leave dangling
  // references inside the loop.
  const json jtfs = jp.value("tf", json::object());
  for (const auto& [key, jtf] : jtfs.items())
    p.tf[key] = TransferFunction{jtf.value("alpha", 0.0),
                                 jtf.value("beta", 0.0)};
  for (const json& f : jp.value("fixed", json::array()))
    p.fixed.insert(f.get<std::string>());
  const json jsig = jp.value("sigma", json::object());
  for (const auto& [name, s] : jsig.items()) p.sigma[name] = s.get<double>();
  p.covariance_names =
      jp.value("covariance_names", std::vector<std::string>{});
  const json cov = jp.value("covariance", json::array());
  const Eigen::Index n = static_cast<Eigen::Index>(cov.size());
  p.covariance.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      p.covariance(r, c) = cov[r][c].get<double>();

  if (j.contains("report")) {
    const json& jr = j["report"];
    fit.report.mbe = jr.value("mbe", 0.0);
    fit.report.rmse = jr.value("rmse", 0.0);
    fit.report.n_obs = jr.value("n_obs", std::size_t{0});
    fit.report.n_params = jr.value("n_params", std::size_t{0});
    fit.report.before_mbe = jr.value("before_mbe", 0.0);
    fit.report.before_rmse = jr.value("before_rmse", 0.0);
    fit.report.lm_iterations = jr.value("lm_iterations", 0);
    fit.report.warnings = jr.value("warnings", std::vector<std::string>{});
  }
  return fit;
}

void save_series_csv(const std::string& path,
                     const std::vector<TimeSeries>& columns,
                     const std::vector<std::string>& names) {
  if (columns.empty() || columns.size() != names.size())
    throw ConfigError("save_series_csv: column/name mismatch");
  for (const TimeSeries& c : columns)
    require_aligned(columns.front(), c.with_unit(columns.front().unit()),
                    "save_series_csv");

  std::ostringstream out;
  out << "timestamp";
  for (const std::string& n : names) out << ',' << n;
  out << '\n';
  const TimeSeries& ref = columns.front();
  for (std::size_t k = 0; k < ref.size(); ++k) {
    out << format_timestamp(ref.start() + static_cast<Time>(k) * ref.step());
    for (const TimeSeries& c : columns) out << ',' << fmt(c[k]);
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace epe::io
