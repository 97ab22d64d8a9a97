#include "epe/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epe {

namespace {

constexpr double kAlphaBound = 0.9999;
constexpr double kConditionLimit = 1e8;   // on X'X
constexpr double kVifLimit = 10.0;
constexpr int kMaxLmIterations = 200;

std::string p_name(const std::string& flow_key) {
  return "p_" + flow_key.substr(2);  // q_blc -> p_blc
}

std::vector<std::string> free_scales(const std::set<std::string>& fixed) {
  std::vector<std::string> out;
  for (const std::string& k : flow_keys())
    if (!fixed.count(p_name(k))) out.push_back(k);
  return out;
}

double tail_stat(const TimeSeries& s, std::size_t burn, bool rms) {
  if (s.size() <= burn) throw DataError("series shorter than burn-in");
  double acc = 0.0;
  for (std::size_t k = burn; k < s.size(); ++k)
    acc += rms ? s[k] * s[k] : s[k];
  const double n = static_cast<double>(s.size() - burn);
  return rms ? std::sqrt(acc / n) : acc / n;
}

}  // namespace

std::size_t burn_in_steps(const TimeSeries& s) {
  return std::min<std::size_t>(s.size(),
                               static_cast<std::size_t>(86400 / s.step()));
}

double tail_mean(const TimeSeries& s, std::size_t burn) {
  return tail_stat(s, burn, false);
}

double tail_rms(const TimeSeries& s, std::size_t burn) {
  return tail_stat(s, burn, true);
}

double ShellParameters::scale(const std::string& flow) const {
  if (flow == "q_blc") return p_blc;
  if (flow == "q_in") return p_in;
  if (flow == "q_sun") return p_sun;
  if (flow == "q_lep") return p_lep;
  throw DataError("unknown flow key '" + flow + "'");
}

void ShellParameters::set_scale(const std::string& flow, double v) {
  if (flow == "q_blc") p_blc = v;
  else if (flow == "q_in") p_in = v;
  else if (flow == "q_sun") p_sun = v;
  else if (flow == "q_lep") p_lep = v;
  else throw DataError("unknown flow key '" + flow + "'");
}

const TimeSeries& flow_by_key(const HeatFlowSet& flows,
                              const std::string& key) {
  if (key == "q_blc") return flows.q_blc;
  if (key == "q_in") return flows.q_in;
  if (key == "q_sun") return flows.q_sun;
  if (key == "q_lep") return flows.q_lep;
  if (key == "q1") return flows.q1;
  throw DataError("unknown flow key '" + key + "'");
}

TimeSeries tf_flow(const TimeSeries& flow, double alpha, double beta) {
  if (std::abs(alpha) >= 1.0)
    throw NumericalError("tf_flow: |alpha| >= 1 is unstable");
  std::vector<double> out(flow.size(), 0.0);
  for (std::size_t t = 1; t < flow.size(); ++t)
    out[t] = alpha * out[t - 1] + beta * (flow[t] - flow[t - 1]);
  return flow.with_values(std::move(out));
}

TimeSeries balance_residual(const HeatFlowSet& flows, const TimeSeries& q_hc,
                            const ShellParameters& params) {
  require_aligned(flows.q_blc, q_hc, "balance_residual");
  TimeSeries r = q_hc;
  for (const std::string& k : flow_keys())
    r = r + flow_by_key(flows, k).scaled(params.scale(k));
  for (const auto& [key, tf] : params.tf)
    r = r + tf_flow(flow_by_key(flows, key), tf.alpha, tf.beta);
  return r;
}

TimeSeries corrective_flow(const HeatFlowSet& flows,
                           const ShellParameters& params) {
  TimeSeries q = flows.q_blc.scaled(params.p_blc - 1.0);
  q = q + flows.q_in.scaled(params.p_in - 1.0);
  q = q + flows.q_sun.scaled(params.p_sun - 1.0);
  q = q + flows.q_lep.scaled(params.p_lep - 1.0);
  for (const auto& [key, tf] : params.tf)
    q = q + tf_flow(flow_by_key(flows, key), tf.alpha, tf.beta);
  return q;
}

namespace {

void fill_report(FitReport& rep, const HeatFlowSet& flows,
                 const TimeSeries& q_hc, const ShellParameters& params,
                 std::size_t n_params) {
  rep.residuals = balance_residual(flows, q_hc, params);
  const std::size_t burn = burn_in_steps(rep.residuals);
  rep.mbe = tail_mean(rep.residuals, burn);
  rep.rmse = tail_rms(rep.residuals, burn);
  rep.n_obs = rep.residuals.size() - burn;
  rep.n_params = n_params;
  const TimeSeries before = balance_residual(flows, q_hc, ShellParameters{});
  rep.before_mbe = tail_mean(before, burn);
  rep.before_rmse = tail_rms(before, burn);
}

struct LinearSystem {
  Eigen::MatrixXd x;          // tail rows only
  Eigen::VectorXd y;
  std::vector<std::string> cols;  // flow keys
};

LinearSystem build_linear(const HeatFlowSet& flows, const TimeSeries& q_hc,
                          const std::set<std::string>& fixed) {
  require_aligned(flows.q_blc, q_hc, "fit_linear");
  const std::size_t burn = burn_in_steps(q_hc);
  const std::size_t n = q_hc.size() - burn;
  LinearSystem ls;
  ls.cols = free_scales(fixed);
  ls.x.resize(n, ls.cols.size());
  ls.y.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double y = -q_hc[burn + t];
    for (const std::string& k : flow_keys())
      if (fixed.count(p_name(k))) y -= flow_by_key(flows, k)[burn + t];
    ls.y(t) = y;
    for (std::size_t j = 0; j < ls.cols.size(); ++j)
      ls.x(t, j) = flow_by_key(flows, ls.cols[j])[burn + t];
  }
  return ls;
}

// Variance inflation factor of column j, regressed through the origin.
double vif(const Eigen::MatrixXd& x, Eigen::Index j) {
  if (x.cols() < 2) return 1.0;
  Eigen::MatrixXd others(x.rows(), x.cols() - 1);
  Eigen::Index c = 0;
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    if (k != j) others.col(c++) = x.col(k);
  const Eigen::VectorXd target = x.col(j);
  const Eigen::VectorXd coef =
      others.colPivHouseholderQr().solve(target);
  const double ssr = (target - others * coef).squaredNorm();
  const double sst = target.squaredNorm();
  if (sst <= 0.0) return 1.0;
  const double r2 = 1.0 - ssr / sst;
  return r2 >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
}

std::pair<std::string, std::string> worst_pair(const LinearSystem& ls) {
  double best = -1.0;
  std::pair<std::string, std::string> out{"?", "?"};
  for (std::size_t a = 0; a + 1 < ls.cols.size(); ++a)
    for (std::size_t b = a + 1; b < ls.cols.size(); ++b) {
      const double num = std::abs(ls.x.col(a).dot(ls.x.col(b)));
      const double den = ls.x.col(a).norm() * ls.x.col(b).norm();
      const double corr = den > 0.0 ? num / den : 0.0;
      if (corr > best) {
        best = corr;
        out = {p_name(ls.cols[a]), p_name(ls.cols[b])};
      }
    }
  return out;
}

}  // namespace

FitResult fit_linear(const HeatFlowSet& flows, const TimeSeries& q_hc,
                     const std::set<std::string>& free_params) {
  FitResult res;
  for (const std::string& k : flow_keys())
    if (!free_params.count(p_name(k))) res.params.fixed.insert(p_name(k));

  LinearSystem ls = build_linear(flows, q_hc, res.params.fixed);

  // Automatic collinearity policy: pin p_lep when its VIF is excessive.
  for (std::size_t j = 0; j < ls.cols.size(); ++j) {
    if (ls.cols[j] != "q_lep") continue;
    const double v = vif(ls.x, static_cast<Eigen::Index>(j));
    if (v > kVifLimit) {
      res.report.warnings.push_back(
          "p_lep pinned to 1: variance inflation factor " + std::to_string(v) +
          " exceeds " + std::to_string(kVifLimit));
      res.params.fixed.insert("p_lep");
      ls = build_linear(flows, q_hc, res.params.fixed);
    }
    break;
  }

  if (ls.cols.empty()) {
    fill_report(res.report, flows, q_hc, res.params, 0);
    return res;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ls.x);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0 || (sv(0) / smin) * (sv(0) / smin) > kConditionLimit) {
    const auto [a, b] = worst_pair(ls);
    throw NumericalError("fit_linear: design matrix nearly collinear (" + a +
                         " vs " + b + "); pin one of them");
  }

  const Eigen::MatrixXd xtx = ls.x.transpose() * ls.x;
  const Eigen::MatrixXd xtx_inv = xtx.ldlt().solve(
      Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
  const Eigen::VectorXd coef = xtx_inv * (ls.x.transpose() * ls.y);

  const double ssr = (ls.y - ls.x * coef).squaredNorm();
  const std::size_t n = static_cast<std::size_t>(ls.x.rows());
  if (n <= ls.cols.size()) throw DataError("fit_linear: too few observations");
  const double s2 = ssr / static_cast<double>(n - ls.cols.size());

  res.params.covariance = s2 * xtx_inv;
  for (std::size_t j = 0; j < ls.cols.size(); ++j) {
    res.params.set_scale(ls.cols[j], coef(static_cast<Eigen::Index>(j)));
    res.params.covariance_names.push_back(p_name(ls.cols[j]));
    res.params.sigma[p_name(ls.cols[j])] =
        std::sqrt(std::max(0.0, res.params.covariance(j, j)));
  }
  fill_report(res.report, flows, q_hc, res.params, ls.cols.size());
  return res;
}

namespace {

struct NonlinearProblem {
  const HeatFlowSet& flows;
  const TimeSeries& q_hc;
  std::vector<std::string> scale_cols;  // free flow keys
  std::vector<std::string> tf_cols;     // active flow keys
  std::set<std::string> fixed;
  std::size_t burn;
  std::size_t n;  // tail length

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& k : scale_cols) out.push_back(p_name(k));
    for (const auto& k : tf_cols) {
      out.push_back("alpha_" + k.substr(2));
      out.push_back("beta_" + k.substr(2));
    }
    return out;
  }

  ShellParameters to_params(const Eigen::VectorXd& theta) const {
    ShellParameters p;
    p.fixed = fixed;
    std::size_t i = 0;
    for (const auto& k : scale_cols) p.set_scale(k, theta(i++));
    for (const auto& k : tf_cols) {
      TransferFunction tf;
      tf.alpha = theta(i++);
      tf.beta = theta(i++);
      p.tf[k] = tf;
    }
    return p;
  }

  Eigen::VectorXd from_params(const ShellParameters& p) const {
    Eigen::VectorXd theta(scale_cols.size() + 2 * tf_cols.size());
    std::size_t i = 0;
    for (const auto& k : scale_cols) theta(i++) = p.scale(k);
    for (const auto& k : tf_cols) {
      auto it = p.tf.find(k);
      theta(i++) = it != p.tf.end() ? it->second.alpha : 0.0;
      theta(i++) = it != p.tf.end() ? it->second.beta : 0.0;
    }
    return theta;
  }

  // Residual on the tail; Jacobian optionally. The TF sensitivities follow
  // the same recursion as the TF output itself.
  void evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& r,
                Eigen::MatrixXd* jac) const {
    const std::size_t total = q_hc.size();
    std::vector<double> full(total);
    for (std::size_t t = 0; t < total; ++t) full[t] = q_hc[t];
    for (const std::string& k : flow_keys()) {
      double p = 1.0;
      auto it = std::find(scale_cols.begin(), scale_cols.end(), k);
      if (it != scale_cols.end())
        p = theta(static_cast<Eigen::Index>(it - scale_cols.begin()));
      const TimeSeries& q = flow_by_key(flows, k);
      for (std::size_t t = 0; t < total; ++t) full[t] += p * q[t];
    }
    if (jac)
      jac->resize(static_cast<Eigen::Index>(n),
                  static_cast<Eigen::Index>(theta.size()));

    for (std::size_t j = 0; j < tf_cols.size(); ++j) {
      const TimeSeries& q = flow_by_key(flows, tf_cols[j]);
      const double alpha = theta(scale_cols.size() + 2 * j);
      const double beta = theta(scale_cols.size() + 2 * j + 1);
      double out = 0.0, sa = 0.0, sb = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) {
          const double diff = q[t] - q[t - 1];
          sa = out + alpha * sa;  // uses out(t-1)
          sb = alpha * sb + diff;
          out = alpha * out + beta * diff;
        }
        full[t] += out;
        if (jac && t >= burn) {
          (*jac)(t - burn, scale_cols.size() + 2 * j) = sa;
          (*jac)(t - burn, scale_cols.size() + 2 * j + 1) = sb;
        }
      }
    }

    r.resize(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) r(t) = full[burn + t];
    if (jac)
      for (std::size_t jcol = 0; jcol < scale_cols.size(); ++jcol) {
        const TimeSeries& q = flow_by_key(flows, scale_cols[jcol]);
        for (std::size_t t = 0; t < n; ++t)
          (*jac)(t, jcol) = q[burn + t];
      }
  }
};

}  // namespace

FitResult fit_nonlinear(const HeatFlowSet& flows, const TimeSeries& q_hc,
                        const std::set<std::string>& active_tfs,
                        const ShellParameters& init) {
  require_aligned(flows.q_blc, q_hc, "fit_nonlinear");
  NonlinearProblem prob{flows, q_hc, free_scales(init.fixed),
                        {active_tfs.begin(), active_tfs.end()}, init.fixed,
                        burn_in_steps(q_hc), 0};
  prob.n = q_hc.size() - prob.burn;
  for (const std::string& k : prob.tf_cols) flow_by_key(flows, k);  // validate

  FitResult res;
  Eigen::VectorXd theta = prob.from_params(init);
  // At beta = 0 the TF output is identically zero and the alpha column of
  // the Jacobian vanishes; nudge the start point off that degenerate axis.
  for (std::size_t j = 0; j < prob.tf_cols.size(); ++j) {
    double& beta = theta(prob.scale_cols.size() + 2 * j + 1);
    if (beta == 0.0) {
      beta = 1e-3;
      double& alpha = theta(prob.scale_cols.size() + 2 * j);
      if (alpha == 0.0) alpha = 0.5;
    }
  }
  const Eigen::Index np = theta.size();
  if (prob.n <= static_cast<std::size_t>(np))
    throw DataError("fit_nonlinear: too few observations");

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  prob.evaluate(theta, r, &jac);
  double cost = 0.5 * r.squaredNorm();

  double lambda = 0.0;
  bool converged = np == 0;
  int iter = 0;
  for (; iter < kMaxLmIterations && !converged; ++iter) {
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (iter == 0 && np > 0) {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= sv(0) * 1e-14)
        throw NumericalError("fit_nonlinear: J'J is rank deficient");
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
      converged = true;
      break;
    }
    bool stepped = false;
    while (!stepped) {
      Eigen::MatrixXd a = h;
      a.diagonal() += lambda * h.diagonal();
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      const double solve_err = (a * delta + g).norm();
      if (!delta.allFinite() || solve_err > 1e-8 * std::max(1.0, g.norm())) {
        lambda = lambda == 0.0 ? 1e-4 : lambda * 10.0;
        if (lambda > 1e12)
          throw NumericalError("fit_nonlinear: damping diverged");
        continue;
      }
      Eigen::VectorXd theta_new = theta + delta;
      for (std::size_t j = 0; j < prob.tf_cols.size(); ++j) {
        double& a_j = theta_new(prob.scale_cols.size() + 2 * j);
        if (std::abs(a_j) >= 1.0) {
          const std::string msg = "alpha_" + prob.tf_cols[j].substr(2) +
                                  " clamped to the stability bound";
          if (std::find(res.report.warnings.begin(),
                        res.report.warnings.end(),
                        msg) == res.report.warnings.end())
            res.report.warnings.push_back(msg);
          a_j = std::clamp(a_j, -kAlphaBound, kAlphaBound);
        }
      }
      Eigen::VectorXd r_new;
      prob.evaluate(theta_new, r_new, nullptr);
      const double cost_new = 0.5 * r_new.squaredNorm();
      if (cost_new <= cost) {
        const double rel = (cost - cost_new) /
                           std::max(cost, std::numeric_limits<double>::min());
        theta = std::move(theta_new);
        prob.evaluate(theta, r, &jac);
        if (rel < 1e-10) converged = true;
        cost = cost_new;
        lambda = lambda < 1e-12 ? 0.0 : lambda / 10.0;
        stepped = true;
      } else {
        lambda = lambda == 0.0 ? 1e-4 : lambda * 10.0;
        if (lambda > 1e12) {
          // No downhill direction left; treat as converged at a flat spot.
          converged = true;
          stepped = true;
        }
      }
    }
  }
  if (!converged)
    throw NumericalError("fit_nonlinear: no convergence after " +
                         std::to_string(kMaxLmIterations) + " iterations");

  res.params = prob.to_params(theta);
  res.report.lm_iterations = iter;

  if (np > 0) {
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const double s2 = r.squaredNorm() / static_cast<double>(prob.n - np);
    const Eigen::MatrixXd cov =
        s2 * h.ldlt().solve(Eigen::MatrixXd::Identity(np, np));
    res.params.covariance = cov;
    res.params.covariance_names = prob.names();
    for (Eigen::Index j = 0; j < np; ++j)
      res.params.sigma[res.params.covariance_names[j]] =
          std::sqrt(std::max(0.0, cov(j, j)));
  }
  fill_report(res.report, flows, q_hc, res.params,
              static_cast<std::size_t>(np));
  return res;
}

Eigen::MatrixXd fit_jacobian(const HeatFlowSet& flows, const TimeSeries& q_hc,
                             const std::set<std::string>& active_tfs,
                             const ShellParameters& at) {
  require_aligned(flows.q_blc, q_hc, "fit_jacobian");
  NonlinearProblem prob{flows, q_hc, free_scales(at.fixed),
                        {active_tfs.begin(), active_tfs.end()}, at.fixed,
                        burn_in_steps(q_hc), 0};
  prob.n = q_hc.size() - prob.burn;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  prob.evaluate(prob.from_params(at), r, &jac);
  return jac;
}

std::vector<TimeSeries> residual_net_input_series(
    const HeatFlowSet& flows, const ShellParameters& params) {
  std::vector<TimeSeries> out{flows.q_blc, flows.q_in, flows.q_sun,
                              flows.q_lep};
  for (const char* key : {"q_in", "q_sun"}) {
    auto it = params.tf.find(key);
    out.push_back(it != params.tf.end()
                      ? tf_flow(flow_by_key(flows, key), it->second.alpha,
                                it->second.beta)
                      : flows.q_blc.scaled(0.0));
  }
  return out;
}

std::vector<Interval> select_window(
    const HeatFlowSet& flows, const std::string& dominant,
    const std::map<std::string, double>& thresholds, int min_steps) {
  const TimeSeries& dom = flow_by_key(flows, dominant);
  double dom_thr = 0.0;
  if (auto it = thresholds.find(dominant); it != thresholds.end())
    dom_thr = it->second;

  std::vector<std::pair<const TimeSeries*, double>> others;
  for (const auto& [key, thr] : thresholds) {
    if (key == dominant) continue;
    others.emplace_back(&flow_by_key(flows, key), thr);
  }

  std::vector<Interval> out;
  std::size_t run_start = 0;
  bool in_run = false;
  auto flush = [&](std::size_t end) {
    if (in_run && end - run_start >= static_cast<std::size_t>(min_steps))
      out.push_back({dom.start() + static_cast<Time>(run_start) * dom.step(),
                     dom.start() + static_cast<Time>(end) * dom.step()});
    in_run = false;
  };
  for (std::size_t k = 0; k < dom.size(); ++k) {
    bool ok = std::abs(dom[k]) >= dom_thr;
    for (const auto& [s, thr] : others)
      ok = ok && std::abs((*s)[k]) <= thr;
    if (ok && !in_run) {
      in_run = true;
      run_start = k;
    } else if (!ok) {
      flush(k);
    }
  }
  flush(dom.size());
  return out;
}

OverparamReport overparam_demo(const BuildingModel& box,
                               const MeasuredDataset& data) {
  if (box.zones.size() != 1)
    throw ConfigError("overparam_demo expects a single-zone box");
  if (!data.q_hc_measured)
    throw DataError("overparam_demo requires q_hc_measured");
  const Zone& zone = box.zones.front();

  std::vector<double> ua;  // component U*A, films included
  for (const Surface& s : zone.surfaces) {
    double r = 1.0 / s.exterior_film + 1.0 / s.interior_film;
    for (const Layer& l : s.layers) r += l.resistance();
    ua.push_back(s.area / r);
  }
  for (const Window& w : zone.windows) ua.push_back(w.u_value * w.area);

  const TimeSeries& q_mea = *data.q_hc_measured;
  const TimeSeries t_in = data.t_in.at(zone.name).slice(q_mea.span());
  const TimeSeries t_out = data.weather.t_out.slice(q_mea.span());

  OverparamReport rep;
  for (double v : ua) rep.blc += v;

  // Component design matrix: every column shares the (T_in - T_out) driver.
  Eigen::MatrixXd x(q_mea.size(), ua.size());
  Eigen::VectorXd q_sim(q_mea.size()), y(q_mea.size());
  for (std::size_t t = 0; t < q_mea.size(); ++t) {
    const double dt = t_in[t] - t_out[t];
    for (std::size_t j = 0; j < ua.size(); ++j) x(t, j) = ua[j] * dt;
    q_sim(t) = rep.blc * dt;
    y(t) = q_mea[t];
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto& sv = svd.singularValues();
  rep.singular_ratio = sv.size() > 1 && sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
  rep.numerical_rank = 0;
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (sv(j) > sv(0) * 1e-10) ++rep.numerical_rank;

  const double den = q_sim.squaredNorm();
  if (den <= 0.0) throw DataError("overparam_demo: zero driving signal");
  rep.p_blc = q_sim.dot(y) / den;
  return rep;
}

}  // namespace epe
