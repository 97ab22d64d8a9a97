#include "epe/residual_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace epe {

namespace {

Eigen::VectorXd normalize(const ResidualNet& net, const Eigen::VectorXd& raw) {
  return (raw - net.input_mean).cwiseQuotient(net.input_scale);
}

}  // namespace

const std::vector<std::string>& residual_net_inputs() {
  static const std::vector<std::string> names{"q_blc", "q_in", "q_sun",
                                              "q_lep", "q_tf_in", "q_tf_sun"};
  return names;
}

std::size_t ResidualNet::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
}

double ResidualNet::forward(const Eigen::VectorXd& raw_inputs) const {
  const Eigen::VectorXd z = normalize(*this, raw_inputs);
  const Eigen::VectorXd h = (w1 * z + b1).array().tanh();
  return (w2.dot(h) + b2) * output_scale + output_mean;
}

Eigen::VectorXd net_weights(const ResidualNet& net) {
  Eigen::VectorXd w(net.parameter_count());
  Eigen::Index i = 0;
  for (int r = 0; r < net.w1.rows(); ++r)
    for (int c = 0; c < net.w1.cols(); ++c) w(i++) = net.w1(r, c);
  for (int r = 0; r < net.b1.size(); ++r) w(i++) = net.b1(r);
  for (int r = 0; r < net.w2.size(); ++r) w(i++) = net.w2(r);
  w(i) = net.b2;
  return w;
}

void set_net_weights(ResidualNet& net, const Eigen::VectorXd& w) {
  Eigen::Index i = 0;
  for (int r = 0; r < net.w1.rows(); ++r)
    for (int c = 0; c < net.w1.cols(); ++c) net.w1(r, c) = w(i++);
  for (int r = 0; r < net.b1.size(); ++r) net.b1(r) = w(i++);
  for (int r = 0; r < net.w2.size(); ++r) net.w2(r) = w(i++);
  net.b2 = w(i);
}

Eigen::VectorXd net_gradient(const ResidualNet& net, const Eigen::VectorXd& x,
                             double y) {
  const Eigen::VectorXd h = (net.w1 * x + net.b1).array().tanh();
  const double err = net.w2.dot(h) + net.b2 - y;
  const Eigen::VectorXd dh =
      (err * net.w2.array() * (1.0 - h.array().square())).matrix();
  Eigen::VectorXd g(net.parameter_count());
  Eigen::Index i = 0;
  for (int r = 0; r < net.w1.rows(); ++r)
    for (int c = 0; c < net.w1.cols(); ++c) g(i++) = dh(r) * x(c);
  for (int r = 0; r < net.b1.size(); ++r) g(i++) = dh(r);
  for (int r = 0; r < net.w2.size(); ++r) g(i++) = err * h(r);
  g(i) = err;
  return g;
}

TrainedNet train_residual_net(const std::vector<TimeSeries>& inputs,
                              const std::vector<std::string>& input_names,
                              const TimeSeries& residuals,
                              const TrainConfig& cfg) {
  if (inputs.size() != input_names.size() || inputs.empty())
    throw ConfigError("train_residual_net: inputs/names mismatch");
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 0.5)
    throw ConfigError("validation_fraction must be in (0, 0.5)");
  for (const TimeSeries& s : inputs)
    require_aligned(s, residuals, "train_residual_net");

  const int ni = static_cast<int>(inputs.size());
  const int nh = cfg.hidden;
  const Eigen::Index n = static_cast<Eigen::Index>(residuals.size());

  TrainedNet out;
  ResidualNet& net = out.net;
  net.input_names = input_names;
  net.w1.resize(nh, ni);
  net.b1 = Eigen::VectorXd::Zero(nh);
  net.w2.resize(nh);
  net.input_mean.resize(ni);
  net.input_scale.resize(ni);

  if (residuals.size() < 10 * net.parameter_count())
    throw DataError("train_residual_net: " + std::to_string(residuals.size()) +
                    " observations for " +
                    std::to_string(net.parameter_count()) +
                    " parameters; refusing to train");

  Eigen::MatrixXd x(n, ni);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int j = 0; j < ni; ++j) x(t, j) = inputs[j][t];
    y(t) = residuals[t];
  }
  for (int j = 0; j < ni; ++j) {
    net.input_mean(j) = x.col(j).mean();
    const double var =
        (x.col(j).array() - net.input_mean(j)).square().mean();
    net.input_scale(j) = std::max(std::sqrt(var), 1e-12);
    x.col(j) = (x.col(j).array() - net.input_mean(j)) / net.input_scale(j);
  }
  net.output_mean = y.mean();
  net.output_scale =
      std::max(std::sqrt((y.array() - net.output_mean).square().mean()),
               1e-12);
  y = (y.array() - net.output_mean) / net.output_scale;

  const Eigen::Index n_val = static_cast<Eigen::Index>(
      std::floor(cfg.validation_fraction * static_cast<double>(n)));
  const Eigen::Index n_train = n - n_val;
  const Eigen::MatrixXd xt = x.topRows(n_train);
  const Eigen::VectorXd yt = y.head(n_train);
  const Eigen::MatrixXd xv = x.bottomRows(n_val);
  const Eigen::VectorXd yv = y.tail(n_val);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  const double scale1 = 1.0 / std::sqrt(static_cast<double>(ni));
  const double scale2 = 1.0 / std::sqrt(static_cast<double>(nh));
  for (int r = 0; r < nh; ++r) {
    for (int c = 0; c < ni; ++c) net.w1(r, c) = dist(rng) * scale1;
    net.w2(r) = dist(rng) * scale2;
  }
  net.b2 = 0.0;

  auto eval_rmse = [&](const Eigen::MatrixXd& xm, const Eigen::VectorXd& ym) {
    if (xm.rows() == 0) return 0.0;
    const Eigen::MatrixXd h =
        ((xm * net.w1.transpose()).rowwise() + net.b1.transpose())
            .array()
            .tanh()
            .matrix();
    const Eigen::VectorXd pred =
        ((h * net.w2).array() + net.b2).matrix();
    return std::sqrt((pred - ym).squaredNorm() /
                     static_cast<double>(xm.rows()));
  };

  Eigen::MatrixXd v_w1 = Eigen::MatrixXd::Zero(nh, ni);
  Eigen::VectorXd v_b1 = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd v_w2 = Eigen::VectorXd::Zero(nh);
  double v_b2 = 0.0;

  double best_val = eval_rmse(xv, yv);
  Eigen::VectorXd best_weights = net_weights(net);
  int since_best = 0;
  int epoch = 0;
  const double inv_n = 1.0 / static_cast<double>(n_train);

  for (; epoch < cfg.max_epochs; ++epoch) {
    const Eigen::MatrixXd h =
        ((xt * net.w1.transpose()).rowwise() + net.b1.transpose())
            .array()
            .tanh()
            .matrix();
    const Eigen::VectorXd err =
        ((h * net.w2).array() + net.b2 - yt.array()).matrix();
    const Eigen::MatrixXd dh =
        ((err * net.w2.transpose()).array() * (1.0 - h.array().square()))
            .matrix();

    const Eigen::MatrixXd g_w1 = dh.transpose() * xt * inv_n;
    const Eigen::VectorXd g_b1 = dh.colwise().sum().transpose() * inv_n;
    const Eigen::VectorXd g_w2 = h.transpose() * err * inv_n;
    const double g_b2 = err.mean();

    v_w1 = cfg.momentum * v_w1 - cfg.learn_rate * g_w1;
    v_b1 = cfg.momentum * v_b1 - cfg.learn_rate * g_b1;
    v_w2 = cfg.momentum * v_w2 - cfg.learn_rate * g_w2;
    v_b2 = cfg.momentum * v_b2 - cfg.learn_rate * g_b2;
    net.w1 += v_w1;
    net.b1 += v_b1;
    net.w2 += v_w2;
    net.b2 += v_b2;

    const double val = eval_rmse(xv, yv);
    if (val < best_val - 1e-12) {
      best_val = val;
      best_weights = net_weights(net);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      ++epoch;
      break;
    }
  }
  set_net_weights(net, best_weights);

  out.metrics.epochs_run = epoch;
  out.metrics.train_rmse = eval_rmse(xt, yt) * net.output_scale;
  out.metrics.validation_rmse = best_val * net.output_scale;
  return out;
}

TimeSeries predict_residuals(const ResidualNet& net,
                             const std::vector<TimeSeries>& inputs,
                             const std::vector<std::string>& input_names) {
  std::vector<const TimeSeries*> cols(net.input_names.size(), nullptr);
  for (std::size_t j = 0; j < net.input_names.size(); ++j) {
    for (std::size_t k = 0; k < input_names.size(); ++k)
      if (input_names[k] == net.input_names[j]) cols[j] = &inputs[k];
    if (!cols[j])
      throw DataError("predict_residuals: missing input series '" +
                      net.input_names[j] + "'");
  }
  for (const auto* s : cols) require_aligned(*cols[0], *s, "predict_residuals");

  const std::size_t n = cols[0]->size();
  std::vector<double> out(n);
  Eigen::VectorXd raw(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      raw(static_cast<Eigen::Index>(j)) = (*cols[j])[t];
    out[t] = net.forward(raw);
  }
  return TimeSeries(cols[0]->start(), cols[0]->step(), std::move(out),
                    Unit::Watt);
}

std::string net_to_json(const ResidualNet& net) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["input_names"] = net.input_names;
  j["hidden"] = net.hidden();
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["input_mean"] = vec(net.input_mean);
  j["input_scale"] = vec(net.input_scale);
  j["output_mean"] = net.output_mean;
  j["output_scale"] = net.output_scale;
  std::vector<double> w1;
  for (int r = 0; r < net.w1.rows(); ++r)
    for (int c = 0; c < net.w1.cols(); ++c) w1.push_back(net.w1(r, c));
  j["w1"] = w1;
  j["b1"] = vec(net.b1);
  j["w2"] = vec(net.w2);
  j["b2"] = net.b2;
  return j.dump(2);
}

ResidualNet net_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("net JSON parse error: ") + e.what());
  }
  ResidualNet net;
  try {
    net.input_names = j.at("input_names").get<std::vector<std::string>>();
    const int nh = j.at("hidden").get<int>();
    const int ni = static_cast<int>(net.input_names.size());
    auto vec = [&](const char* key, Eigen::Index len) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != len)
        throw DataError(std::string("net JSON: bad length for ") + key);
      return Eigen::Map<const Eigen::VectorXd>(v.data(), len).eval();
    };
    net.input_mean = vec("input_mean", ni);
    net.input_scale = vec("input_scale", ni);
    net.output_mean = j.at("output_mean").get<double>();
    net.output_scale = j.at("output_scale").get<double>();
    const Eigen::VectorXd w1 = vec("w1", nh * ni);
    net.w1.resize(nh, ni);
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < ni; ++c) net.w1(r, c) = w1(r * ni + c);
    net.b1 = vec("b1", nh);
    net.w2 = vec("w2", nh);
    net.b2 = j.at("b2").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("net JSON schema error: ") + e.what());
  }
  return net;
}

}  // namespace epe
