#include "epe/thermal.hpp"

#include <algorithm>
#include <cmath>

namespace epe {

namespace {

constexpr int kSubsteps = 4;
constexpr int kWarmupDays = 7;
constexpr double kAirDensity = 1.2;        // kg/m3
constexpr double kAirSpecificHeat = 1006;  // J/kg.K

struct NodeBuilder {
  std::vector<std::vector<double>> g;  // adjacency, symmetric
  std::vector<double> cap;
  std::vector<double> gout;

  int add(double c) {
    cap.push_back(c);
    gout.push_back(0.0);
    for (auto& row : g) row.push_back(0.0);
    g.emplace_back(cap.size(), 0.0);
    return static_cast<int>(cap.size()) - 1;
  }
  void couple(int a, int b, double cond) {
    g[a][b] += cond;
    g[b][a] += cond;
  }
};

}  // namespace

int StateSpaceSystem::zone_index(const std::string& name) const {
  for (std::size_t i = 0; i < zone_names.size(); ++i)
    if (zone_names[i] == name) return static_cast<int>(i);
  throw DataError("unknown zone '" + name + "'");
}

TimeSeries RunResult::total_ideal_load() const {
  TimeSeries total;
  bool first = true;
  for (const auto& [zone, q] : ideal_load) {
    total = first ? q : total + q;
    first = false;
  }
  return total;
}

StateSpaceSystem discretize(const BuildingModel& model) {
  model.validate();
  StateSpaceSystem sys;
  sys.latitude = model.latitude;
  NodeBuilder nb;

  for (const Zone& zone : model.zones) {
    const int zi = static_cast<int>(sys.zone_names.size());
    sys.zone_names.push_back(zone.name);
    const int air = nb.add(zone.air_capacitance);
    sys.air_node.push_back(air);
    sys.solar_air_fraction.push_back(zone.solar_to_air_fraction);
    sys.lep_air_fraction.push_back(1.0 - zone.lep_radiative_fraction);
    sys.solar_deposit.emplace_back();
    sys.lep_deposit.emplace_back();

    // Infiltration as an air-outdoor conductance at nominal ACH.
    nb.gout[air] +=
        kAirDensity * kAirSpecificHeat * zone.infiltration_ach * zone.volume /
        3600.0;

    double interior_area = 0.0;
    for (const Surface& s : zone.surfaces) interior_area += s.area;

    for (const Surface& s : zone.surfaces) {
      // T-network per layer: half-resistances around a central capacitance,
      // plus massless face nodes carrying films and solar deposition.
      const int outer = nb.add(0.0);
      int prev = outer;
      double half_prev = 0.0;  // m2K/W on the inner side of prev
      for (const Layer& l : s.layers) {
        const int node = nb.add(l.capacitance() * s.area);
        const double r = half_prev + l.resistance() / 2.0;
        nb.couple(prev, node, s.area / r);
        prev = node;
        half_prev = l.resistance() / 2.0;
      }
      const int inner = nb.add(0.0);
      nb.couple(prev, inner, s.area / half_prev);
      nb.couple(inner, air, s.interior_film * s.area);

      if (s.exterior) {
        nb.gout[outer] += s.exterior_film * s.area;
        if (s.solar_absorptance > 0.0)
          sys.opaque_solar.push_back(
              {outer, s.solar_absorptance * s.area, s.orientation});
      }
      if (s.solar_gain_share > 0.0)
        sys.solar_deposit[zi].push_back({inner, s.solar_gain_share});
      if (zone.lep_radiative_fraction > 0.0 && interior_area > 0.0)
        sys.lep_deposit[zi].push_back(
            {inner, zone.lep_radiative_fraction * s.area / interior_area});
    }

    for (const Window& w : zone.windows) {
      nb.gout[air] += w.u_value * w.area;
      sys.apertures.push_back({zi, w.shgc * w.area, w.orientation});
    }
  }

  sys.n = static_cast<int>(nb.cap.size());
  sys.laplacian = Eigen::MatrixXd::Zero(sys.n, sys.n);
  sys.capacitance = Eigen::VectorXd::Zero(sys.n);
  sys.g_out = Eigen::VectorXd::Zero(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    sys.capacitance(i) = nb.cap[i];
    sys.g_out(i) = nb.gout[i];
    double diag = 0.0;
    for (int j = 0; j < sys.n; ++j) {
      if (j == i) continue;
      sys.laplacian(i, j) = -nb.g[i][j];
      diag += nb.g[i][j];
    }
    sys.laplacian(i, i) = diag;
    if (diag + nb.gout[i] <= 0.0)
      throw DataError("singular network: node " + std::to_string(i) +
                      " has no conductance to anything");
  }
  return sys;
}

namespace {

// Per-source-step exogenous inputs on the analysis window.
struct ExogenousInputs {
  Time step = kHour;
  std::size_t n_steps = 0;
  std::vector<double> t_out;
  std::vector<Eigen::VectorXd> q;                 // node heat input, W
  std::vector<std::vector<double>> setpoint;      // [step][zone], track only
};

ExogenousInputs build_inputs(const StateSpaceSystem& sys, const RunSpec& spec) {
  const WeatherSeries wx = spec.weather.slice(spec.window);
  wx.validate();
  ExogenousInputs in;
  in.step = wx.t_out.step();
  in.n_steps = wx.t_out.size();
  in.t_out = wx.t_out.values();

  const std::size_t nz = sys.zone_names.size();

  std::vector<TimeSeries> lep(nz);
  if (!spec.zero_lep) {
    for (std::size_t z = 0; z < nz; ++z) {
      auto it = spec.lep.find(sys.zone_names[z]);
      if (it != spec.lep.end()) lep[z] = it->second.slice(spec.window);
    }
  }
  std::vector<TimeSeries> process(nz);
  for (std::size_t z = 0; z < nz; ++z) {
    auto it = spec.process_load.find(sys.zone_names[z]);
    if (it != spec.process_load.end())
      process[z] = it->second.slice(spec.window);
  }

  // Plane-of-array irradiance per coupling, evaluated at mid-step sun
  // position.
  std::vector<std::vector<double>> ap_poa(sys.apertures.size());
  std::vector<std::vector<double>> op_poa(sys.opaque_solar.size());
  if (!spec.zero_solar) {
    for (std::size_t a = 0; a < sys.apertures.size(); ++a)
      ap_poa[a].resize(in.n_steps);
    for (std::size_t o = 0; o < sys.opaque_solar.size(); ++o)
      op_poa[o].resize(in.n_steps);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < static_cast<long long>(in.n_steps); ++k) {
      const Time mid = spec.window.begin + static_cast<Time>(k) * in.step +
                       in.step / 2;
      const double ghi = wx.ghi[k], dni = wx.dni[k], dhi = wx.dhi[k];
      for (std::size_t a = 0; a < sys.apertures.size(); ++a)
        ap_poa[a][k] = solar::poa_irradiance(sys.latitude, mid, ghi, dni, dhi,
                                             sys.apertures[a].orientation);
      for (std::size_t o = 0; o < sys.opaque_solar.size(); ++o)
        op_poa[o][k] = solar::poa_irradiance(
            sys.latitude, mid, ghi, dni, dhi,
            sys.opaque_solar[o].orientation);
    }
  }

  in.q.assign(in.n_steps, Eigen::VectorXd::Zero(sys.n));
  for (std::size_t k = 0; k < in.n_steps; ++k) {
    Eigen::VectorXd& q = in.q[k];
    if (!spec.zero_solar) {
      std::vector<double> transmitted(nz, 0.0);
      for (std::size_t a = 0; a < sys.apertures.size(); ++a)
        transmitted[sys.apertures[a].zone] +=
            sys.apertures[a].shgc_area * ap_poa[a][k];
      for (std::size_t o = 0; o < sys.opaque_solar.size(); ++o)
        q(sys.opaque_solar[o].node) +=
            sys.opaque_solar[o].absorptance_area * op_poa[o][k];
      for (std::size_t z = 0; z < nz; ++z) {
        q(sys.air_node[z]) += sys.solar_air_fraction[z] * transmitted[z];
        for (const auto& dep : sys.solar_deposit[z])
          q(dep.node) += dep.share * transmitted[z];
      }
    }
    for (std::size_t z = 0; z < nz; ++z) {
      if (!lep[z].empty()) {
        const double w = lep[z][k];
        q(sys.air_node[z]) += sys.lep_air_fraction[z] * w;
        for (const auto& dep : sys.lep_deposit[z]) q(dep.node) += dep.share * w;
      }
      if (!process[z].empty()) q(sys.air_node[z]) += process[z][k];
    }
  }

  if (spec.mode == RunSpec::Mode::TrackSetpoints) {
    in.setpoint.assign(in.n_steps, std::vector<double>(nz, 0.0));
    if (spec.fixed_temp_override) {
      for (auto& row : in.setpoint)
        std::fill(row.begin(), row.end(), *spec.fixed_temp_override);
    } else {
      for (std::size_t z = 0; z < nz; ++z) {
        auto it = spec.setpoints.find(sys.zone_names[z]);
        if (it == spec.setpoints.end())
          throw DataError("track mode: missing setpoints for zone '" +
                          sys.zone_names[z] + "'");
        const TimeSeries sp = it->second.slice(spec.window);
        for (std::size_t k = 0; k < in.n_steps; ++k)
          in.setpoint[k][z] = sp[k];
      }
    }
  }
  return in;
}

struct Engine {
  const StateSpaceSystem& sys;
  const ExogenousInputs& in;
  RunSpec::Mode mode;
  double dt;

  std::vector<int> free_nodes;
  std::vector<int> fixed_nodes;  // air nodes, track mode
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd a_fp;  // track mode coupling of free rows to air columns
  Eigen::MatrixXd a_full;

  explicit Engine(const StateSpaceSystem& s, const ExogenousInputs& inputs,
                  RunSpec::Mode m)
      : sys(s), in(inputs), mode(m),
        dt(static_cast<double>(in.step) / kSubsteps) {
    a_full = sys.laplacian;
    a_full.diagonal() += sys.g_out + sys.capacitance / dt;
    if (mode == RunSpec::Mode::TrackSetpoints) {
      std::vector<bool> fixed(sys.n, false);
      for (int a : sys.air_node) fixed[a] = true;
      for (int i = 0; i < sys.n; ++i)
        (fixed[i] ? fixed_nodes : free_nodes).push_back(i);
      const int nf = static_cast<int>(free_nodes.size());
      const int np = static_cast<int>(fixed_nodes.size());
      Eigen::MatrixXd a_ff(nf, nf);
      a_fp.resize(nf, np);
      for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j)
          a_ff(i, j) = a_full(free_nodes[i], free_nodes[j]);
        for (int j = 0; j < np; ++j)
          a_fp(i, j) = a_full(free_nodes[i], fixed_nodes[j]);
      }
      lu.compute(a_ff);
    } else {
      lu.compute(a_full);
    }
  }

  // One backward-Euler substep; state updated in place. Returns the hvac heat
  // delivered to each air node (track) and the envelope heat flow.
  void substep(std::size_t src, Eigen::VectorXd& state,
               std::vector<double>& hvac, double& envelope) const {
    const double t_out = in.t_out[src];
    const Eigen::VectorXd& q = in.q[src];
    Eigen::VectorXd next(sys.n);
    if (mode == RunSpec::Mode::TrackSetpoints) {
      const int nf = static_cast<int>(free_nodes.size());
      const int np = static_cast<int>(fixed_nodes.size());
      Eigen::VectorXd t_p(np);
      for (int j = 0; j < np; ++j) t_p(j) = in.setpoint[src][j];
      Eigen::VectorXd rhs(nf);
      for (int i = 0; i < nf; ++i) {
        const int g = free_nodes[i];
        rhs(i) = sys.capacitance(g) / dt * state(g) + q(g) +
                 sys.g_out(g) * t_out;
      }
      rhs -= a_fp * t_p;
      const Eigen::VectorXd t_f = lu.solve(rhs);
      for (int i = 0; i < nf; ++i) next(free_nodes[i]) = t_f(i);
      for (int j = 0; j < np; ++j) next(fixed_nodes[j]) = t_p(j);
      const Eigen::VectorXd at = a_full * next;
      for (int j = 0; j < np; ++j) {
        const int p = fixed_nodes[j];
        hvac[j] = at(p) - sys.capacitance(p) / dt * state(p) -
                  sys.g_out(p) * t_out - q(p);
      }
    } else {
      Eigen::VectorXd rhs(sys.n);
      for (int i = 0; i < sys.n; ++i)
        rhs(i) = sys.capacitance(i) / dt * state(i) + q(i) +
                 sys.g_out(i) * t_out;
      next = lu.solve(rhs);
      std::fill(hvac.begin(), hvac.end(), 0.0);
    }
    envelope = (sys.g_out.array() * (t_out - next.array())).sum();
    state = next;
  }
};

Eigen::VectorXd initial_guess(const StateSpaceSystem& sys,
                              const ExogenousInputs& in, RunSpec::Mode mode) {
  double t0 = in.t_out.empty() ? 20.0 : in.t_out.front();
  if (mode == RunSpec::Mode::TrackSetpoints && !in.setpoint.empty() &&
      !in.setpoint.front().empty())
    t0 = in.setpoint.front().front();
  return Eigen::VectorXd::Constant(sys.n, t0);
}

// Warm-up source schedule: the first day of the window tiled kWarmupDays
// times (shorter windows tile what they have).
std::size_t warmup_steps(const ExogenousInputs& in) {
  const std::size_t day = std::min<std::size_t>(
      in.n_steps, static_cast<std::size_t>(86400 / in.step));
  return day * kWarmupDays;
}

void run_warmup(const Engine& eng, const ExogenousInputs& in,
                Eigen::VectorXd& state) {
  const std::size_t day = std::min<std::size_t>(
      in.n_steps, static_cast<std::size_t>(86400 / in.step));
  if (day == 0) return;
  std::vector<double> hvac(eng.sys.air_node.size());
  double env = 0.0;
  const std::size_t total = warmup_steps(in);
  for (std::size_t k = 0; k < total; ++k)
    for (int s = 0; s < kSubsteps; ++s)
      eng.substep(k % day, state, hvac, env);
}

RunResult run_window(const StateSpaceSystem& sys, const RunSpec& spec,
                     const ExogenousInputs& in, Eigen::VectorXd state) {
  Engine eng(sys, in, spec.mode);
  RunResult res;
  res.initial_state = state;
  res.substeps_per_step = kSubsteps;

  const std::size_t nz = sys.zone_names.size();
  std::vector<std::vector<double>> load(nz, std::vector<double>(in.n_steps));
  std::vector<std::vector<double>> temp(nz, std::vector<double>(in.n_steps));
  std::vector<double> env_series(in.n_steps);

  std::vector<double> hvac(nz, 0.0);
  for (std::size_t k = 0; k < in.n_steps; ++k) {
    double env_acc = 0.0;
    std::vector<double> hvac_acc(nz, 0.0);
    for (int s = 0; s < kSubsteps; ++s) {
      double env = 0.0;
      eng.substep(k, state, hvac, env);
      env_acc += env;
      for (std::size_t z = 0; z < nz; ++z) hvac_acc[z] += hvac[z];
    }
    env_series[k] = env_acc / kSubsteps;
    for (std::size_t z = 0; z < nz; ++z) {
      load[z][k] = hvac_acc[z] / kSubsteps;
      temp[z][k] = state(sys.air_node[z]);
    }
  }

  // Free-float delivers nothing; report the process load as the ideal load.
  for (std::size_t z = 0; z < nz; ++z) {
    TimeSeries lz(spec.window.begin, in.step, std::move(load[z]), Unit::Watt);
    if (spec.mode == RunSpec::Mode::FreeFloat) {
      auto it = spec.process_load.find(sys.zone_names[z]);
      lz = it != spec.process_load.end()
               ? it->second.slice(spec.window)
               : TimeSeries::constant(spec.window.begin, in.step, in.n_steps,
                                      0.0, Unit::Watt);
    }
    res.ideal_load.emplace(sys.zone_names[z], std::move(lz));
    res.air_temp.emplace(
        sys.zone_names[z],
        TimeSeries(spec.window.begin, in.step, std::move(temp[z]),
                   Unit::Celsius));
  }
  res.envelope_heat =
      TimeSeries(spec.window.begin, in.step, std::move(env_series), Unit::Watt);
  res.final_state = std::move(state);
  return res;
}

}  // namespace

Eigen::VectorXd warmup_state(const StateSpaceSystem& system,
                             const RunSpec& spec) {
  const ExogenousInputs in = build_inputs(system, spec);
  Engine eng(system, in, spec.mode);
  Eigen::VectorXd state = initial_guess(system, in, spec.mode);
  run_warmup(eng, in, state);
  return state;
}

RunResult simulate(const StateSpaceSystem& system, const RunSpec& spec) {
  const ExogenousInputs in = build_inputs(system, spec);
  Engine eng(system, in, spec.mode);
  Eigen::VectorXd state = initial_guess(system, in, spec.mode);
  run_warmup(eng, in, state);
  return run_window(system, spec, in, std::move(state));
}

RunResult simulate_from(const StateSpaceSystem& system, const RunSpec& spec,
                        const Eigen::VectorXd& state0) {
  const ExogenousInputs in = build_inputs(system, spec);
  if (state0.size() != system.n)
    throw DataError("simulate_from: state size mismatch");
  return run_window(system, spec, in, state0);
}

std::map<std::string, TimeSeries> solar_gains(const BuildingModel& model,
                                              const WeatherSeries& weather) {
  const StateSpaceSystem sys = discretize(model);
  const TimeSeries& t_out = weather.t_out;
  std::map<std::string, TimeSeries> out;
  std::vector<std::vector<double>> acc(
      sys.zone_names.size(), std::vector<double>(t_out.size(), 0.0));
  for (const auto& ap : sys.apertures) {
    for (std::size_t k = 0; k < t_out.size(); ++k) {
      const Time mid =
          t_out.start() + static_cast<Time>(k) * t_out.step() + t_out.step() / 2;
      acc[ap.zone][k] += ap.shgc_area *
                         solar::poa_irradiance(sys.latitude, mid,
                                               weather.ghi[k], weather.dni[k],
                                               weather.dhi[k], ap.orientation);
    }
  }
  for (std::size_t z = 0; z < sys.zone_names.size(); ++z)
    out.emplace(sys.zone_names[z],
                TimeSeries(t_out.start(), t_out.step(), std::move(acc[z]),
                           Unit::Watt));
  return out;
}

double steady_state_blc(const StateSpaceSystem& sys) {
  std::vector<int> free_nodes, fixed_nodes;
  std::vector<bool> fixed(sys.n, false);
  for (int a : sys.air_node) fixed[a] = true;
  for (int i = 0; i < sys.n; ++i)
    (fixed[i] ? fixed_nodes : free_nodes).push_back(i);

  Eigen::MatrixXd a = sys.laplacian;
  a.diagonal() += sys.g_out;

  const int nf = static_cast<int>(free_nodes.size());
  const int np = static_cast<int>(fixed_nodes.size());
  Eigen::VectorXd t = Eigen::VectorXd::Zero(sys.n);
  for (int p : fixed_nodes) t(p) = 1.0;
  if (nf > 0) {
    Eigen::MatrixXd a_ff(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j)
        a_ff(i, j) = a(free_nodes[i], free_nodes[j]);
      double b = 0.0;
      for (int j = 0; j < np; ++j) b -= a(free_nodes[i], fixed_nodes[j]);
      rhs(i) = b;
    }
    const Eigen::VectorXd t_f = a_ff.partialPivLu().solve(rhs);
    for (int i = 0; i < nf; ++i) t(free_nodes[i]) = t_f(i);
  }
  const Eigen::VectorXd flow = a * t;
  double blc = 0.0;
  for (int p : fixed_nodes) blc += flow(p);
  return blc;
}

}  // namespace epe
