#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "epe/timeseries.hpp"

namespace epe {

// Single-hidden-layer perceptron mapping the six current-hour heat flows to
// the post-fit residual. tanh hidden, linear output; stateless in time.
struct ResidualNet {
  std::vector<std::string> input_names;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  double output_mean = 0.0;
  double output_scale = 1.0;
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  int hidden() const { return static_cast<int>(b1.size()); }
  int inputs() const { return static_cast<int>(input_mean.size()); }
  std::size_t parameter_count() const;

  double forward(const Eigen::VectorXd& raw_inputs) const;
};

struct TrainConfig {
  int hidden = 9;
  int max_epochs = 4000;
  double learn_rate = 0.05;
  double momentum = 0.9;
  double validation_fraction = 0.2;  // chronological tail
  int patience = 50;                 // epochs without validation improvement
  std::uint64_t seed = 1;
};

struct TrainMetrics {
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
  int epochs_run = 0;
};

struct TrainedNet {
  ResidualNet net;
  TrainMetrics metrics;
};

const std::vector<std::string>& residual_net_inputs();  // the six flow names

// rows: one column per input, aligned with residuals.
TrainedNet train_residual_net(const std::vector<TimeSeries>& inputs,
                              const std::vector<std::string>& input_names,
                              const TimeSeries& residuals,
                              const TrainConfig& cfg);

TimeSeries predict_residuals(const ResidualNet& net,
                             const std::vector<TimeSeries>& inputs,
                             const std::vector<std::string>& input_names);

// Flattened analytic gradient of 0.5*(forward(x)-y)^2 with respect to
// [w1, b1, w2, b2] in row-major order, on normalized inputs/targets.
// Exposed for the finite-difference check.
Eigen::VectorXd net_gradient(const ResidualNet& net, const Eigen::VectorXd& x,
                             double y);
Eigen::VectorXd net_weights(const ResidualNet& net);
void set_net_weights(ResidualNet& net, const Eigen::VectorXd& w);

std::string net_to_json(const ResidualNet& net);
ResidualNet net_from_json(const std::string& json_text);

}  // namespace epe
