#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "epe/building.hpp"
#include "epe/decomposition.hpp"
#include "epe/timeseries.hpp"

namespace epe {

// First-order pole/gain pair reshaping a heat flow's time profile.
struct TransferFunction {
  double alpha = 0.0;  // pole, |alpha| < 1
  double beta = 0.0;   // gain
};

// Flow keys: "q_blc", "q_in", "q_sun", "q_lep". Parameter names add the p_
// prefix ("p_blc", ...); TF parameters are named alpha_<flow>/beta_<flow>.
struct ShellParameters {
  double p_blc = 1.0;
  double p_in = 1.0;
  double p_sun = 1.0;
  double p_lep = 1.0;
  std::map<std::string, TransferFunction> tf;  // by flow key
  std::set<std::string> fixed;                 // parameter names pinned at 1
  std::map<std::string, double> sigma;         // standard errors
  Eigen::MatrixXd covariance;
  std::vector<std::string> covariance_names;

  double scale(const std::string& flow) const;
  void set_scale(const std::string& flow, double v);
};

struct FitReport {
  TimeSeries residuals;  // full window; statistics exclude the first 24 h
  double mbe = 0.0;      // W
  double rmse = 0.0;     // W
  std::size_t n_obs = 0;
  std::size_t n_params = 0;
  double before_mbe = 0.0;   // all p = 1, no TF
  double before_rmse = 0.0;
  int lm_iterations = 0;
  std::vector<std::string> warnings;
};

struct FitResult {
  ShellParameters params;
  FitReport report;
};

inline const std::vector<std::string>& flow_keys() {
  static const std::vector<std::string> k{"q_blc", "q_in", "q_sun", "q_lep"};
  return k;
}

const TimeSeries& flow_by_key(const HeatFlowSet& flows, const std::string& key);

// out(t) = alpha*out(t-1) + beta*(flow(t) - flow(t-1)), out(0) = 0.
TimeSeries tf_flow(const TimeSeries& flow, double alpha, double beta);

// Ordinary least squares for the scale parameters; fixed ones pinned at 1.
// p_lep is pinned automatically when its variance-inflation factor exceeds 10.
FitResult fit_linear(const HeatFlowSet& flows, const TimeSeries& q_hc,
                     const std::set<std::string>& free_params);

// Levenberg-Marquardt over the free scale parameters plus (alpha, beta) for
// each flow in active_tfs. Jacobian by forward sensitivity recursions.
FitResult fit_nonlinear(const HeatFlowSet& flows, const TimeSeries& q_hc,
                        const std::set<std::string>& active_tfs,
                        const ShellParameters& init);

// Analytic Jacobian of the tail balance residual used by fit_nonlinear,
// evaluated at the given parameters. Columns: free scales in flow-key order,
// then (alpha, beta) per active TF flow in ascending key order. Exposed for
// the finite-difference check.
Eigen::MatrixXd fit_jacobian(const HeatFlowSet& flows, const TimeSeries& q_hc,
                             const std::set<std::string>& active_tfs,
                             const ShellParameters& at);

// Corrective process load that makes the unmodified audit model reproduce
// the fitted prediction.
TimeSeries corrective_flow(const HeatFlowSet& flows,
                           const ShellParameters& params);

// Residual of the modified energy balance: sum_k p_k Q_k + TF terms + q_hc.
TimeSeries balance_residual(const HeatFlowSet& flows, const TimeSeries& q_hc,
                            const ShellParameters& params);

// Maximal contiguous runs where |dominant| >= its threshold and every other
// listed flow stays within its threshold in magnitude.
std::vector<Interval> select_window(
    const HeatFlowSet& flows, const std::string& dominant,
    const std::map<std::string, double>& thresholds, int min_steps = 4);

// Demonstration that component-level U*A regression is rank
// deficient; only the lumped coefficient is identifiable.
struct OverparamReport {
  double blc = 0.0;              // sum of component U*A, W/K
  double singular_ratio = 0.0;   // sigma_2 / sigma_1 of the component matrix
  int numerical_rank = 0;
  double p_blc = 0.0;            // single-parameter estimate
};

OverparamReport overparam_demo(const BuildingModel& box,
                               const MeasuredDataset& data);

// The six residual-net input series (four macro flows plus the TF terms of
// q_in and q_sun, zero when inactive), ordered as residual_net_inputs().
std::vector<TimeSeries> residual_net_input_series(const HeatFlowSet& flows,
                                                  const ShellParameters& params);

// Statistics over the series tail after burn_in steps.
double tail_mean(const TimeSeries& s, std::size_t burn_in);
double tail_rms(const TimeSeries& s, std::size_t burn_in);
std::size_t burn_in_steps(const TimeSeries& s);

}  // namespace epe
