#include "almpc/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace almpc {

Standardizer Standardizer::fit(const Eigen::MatrixXd& data) {
  Standardizer s;
  s.mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - s.mean.transpose();
  s.std = (centered.array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < s.std.size(); ++j) {
    if (s.std(j) <= 0.0) s.std(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& data) const {
  return (data.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& data) const {
  return (data.array().rowwise() * std.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) throw DimensionMismatch("Mlp: need at least two layers");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = limit * unit(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

namespace {

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = a * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    a = (l + 1 < weights_.size()) ? sigmoid(z) : z;
  }
  return a;
}

Mlp::Gradients Mlp::backprop(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
  const std::size_t n_layers = weights_.size();
  std::vector<Eigen::MatrixXd> activations(n_layers + 1);
  activations[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = activations[l] * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    activations[l + 1] = (l + 1 < n_layers) ? sigmoid(z) : z;
  }

  Gradients g;
  g.d_weights.resize(n_layers);
  g.d_biases.resize(n_layers);

  const Eigen::MatrixXd diff = activations[n_layers] - y;
  const double n_elems = static_cast<double>(diff.rows()) * static_cast<double>(diff.cols());
  g.loss = diff.array().square().sum() / n_elems;

  Eigen::MatrixXd dz = (2.0 / n_elems) * diff;  // identity output layer
  for (std::size_t l = n_layers; l-- > 0;) {
    g.d_weights[l] = dz.transpose() * activations[l];
    g.d_biases[l] = dz.colwise().sum().transpose();
    if (l > 0) {
      const Eigen::MatrixXd& a = activations[l];
      dz = (dz * weights_[l]).array() * (a.array() * (1.0 - a.array()));
    }
  }
  return g;
}

StiffnessPair StiffnessModel::predict(const FeatureVector& f) const {
  Eigen::MatrixXd x(1, 5);
  x << f.vx, f.vy, f.delta, f.ax, f.omega;
  const Eigen::MatrixXd y = predict_batch(x);
  return {y(0, 0), y(0, 1)};
}

Eigen::MatrixXd StiffnessModel::predict_batch(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd y = target_std.invert(net.forward(feature_std.apply(features)));
  return y.array().max(clamp_lo).min(clamp_hi);
}

StiffnessDataset generate_dataset(const VehicleParams& params, const PacejkaCoeffs& coeffs,
                                  const ManeuverPlan& plan, int n_points, std::uint64_t seed) {
  if (n_points < 1000) throw ConfigError("generate_dataset: need at least 1000 points");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed(plan.speed_min, plan.speed_max);
  std::uniform_real_distribution<double> steer(-plan.steer_max, plan.steer_max);
  std::uniform_real_distribution<double> accel(-plan.accel_max, plan.accel_max);

  StiffnessDataset ds;
  ds.seed = seed;
  ds.features.resize(n_points, 5);
  ds.targets.resize(n_points, 2);

  const auto secant = [&](double alpha, Axle axle) {
    double c;
    if (std::abs(alpha) < 1e-4) {
      c = coeffs.linear_stiffness(axle);
    } else {
      c = pacejka_force(alpha, coeffs, axle) / alpha;
    }
    return std::clamp(c, kStiffnessMin, kStiffnessMax);
  };

  const int steps_per_episode = std::max(1, static_cast<int>(plan.episode_duration / plan.dt));
  int row = 0;
  while (row < n_points) {
    ++ds.episodes;
    VehicleState state;
    state.vx = speed(rng);

    // steering: step-and-hold or sinusoidal sweep
    const bool sweep = unit(rng) < 0.5;
    const double amp = steer(rng);
    const double freq = 0.2 + 0.8 * unit(rng);  // [Hz]
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    double hold_delta = amp;
    double net_accel = accel(rng);
    int resample_counter = 0;

    for (int step = 0; step < steps_per_episode && row < n_points; ++step) {
      const double t = step * plan.dt;
      if (resample_counter-- <= 0) {
        net_accel = accel(rng);
        if (!sweep) hold_delta = steer(rng);
        resample_counter = static_cast<int>(1.0 / plan.dt);
      }
      // steer toward the speed band edges instead of drifting out of them
      if (state.vx > plan.speed_max - 1.0) net_accel = -std::abs(net_accel);
      if (state.vx < plan.speed_min + 1.0) net_accel = std::abs(net_accel);

      const double delta =
          sweep ? amp * std::sin(2.0 * std::numbers::pi * freq * t + phase) : hold_delta;
      const auto [alpha_f, alpha_r] = slip_angles(state, delta, params);
      const double Fyf = pacejka_force(alpha_f, coeffs, Axle::Front);
      const double Fd = drag_force(state.vx, 0.0, params);
      // command the drag-compensated acceleration so the maneuver tracks the
      // target net accel and speeds stay in band
      const double ax = net_accel - state.omega * state.vy +
                        (Fyf * std::sin(delta) + Fd) / params.m;

      ds.features(row, 0) = state.vx;
      ds.features(row, 1) = state.vy;
      ds.features(row, 2) = delta;
      ds.features(row, 3) = ax;
      ds.features(row, 4) = state.omega;
      ds.targets(row, 0) = secant(alpha_f, Axle::Front);
      ds.targets(row, 1) = secant(alpha_r, Axle::Rear);
      ++row;

      state = step_rk4(state, {delta, ax}, 0.0, 0.0, params, coeffs, plan.dt);
      if (std::abs(state.vy) > 6.0 || std::abs(state.omega) > 2.5 || state.vx < 2.0 ||
          state.vx > plan.speed_max + 3.0) {
        break;  // spun out or left the band; start a fresh episode
      }
    }
  }
  return ds;
}

TrainResult train(StiffnessModel& model, const StiffnessDataset& dataset,
                  const TrainConfig& cfg) {
  const Eigen::Index n = dataset.features.rows();
  if (n < 2) throw DimensionMismatch("train: dataset too small");
  if (cfg.batch_size < 1 || cfg.batch_size > n) throw ConfigError("train: bad batch size");
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
    throw ConfigError("train: train_fraction must be in (0,1)");
  }

  model.feature_std = Standardizer::fit(dataset.features);
  model.target_std = Standardizer::fit(dataset.targets);
  const Eigen::MatrixXd x_all = model.feature_std.apply(dataset.features);
  const Eigen::MatrixXd y_all = model.target_std.apply(dataset.targets);

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<Eigen::Index>(std::llround(cfg.train_fraction * n));
  Eigen::MatrixXd x_train(n_train, x_all.cols()), y_train(n_train, y_all.cols());
  Eigen::MatrixXd x_val(n - n_train, x_all.cols()), y_val(n - n_train, y_all.cols());
  TrainResult result;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < n_train) {
      x_train.row(i) = x_all.row(order[static_cast<std::size_t>(i)]);
      y_train.row(i) = y_all.row(order[static_cast<std::size_t>(i)]);
    } else {
      x_val.row(i - n_train) = x_all.row(order[static_cast<std::size_t>(i)]);
      y_val.row(i - n_train) = y_all.row(order[static_cast<std::size_t>(i)]);
      result.val_rows.push_back(order[static_cast<std::size_t>(i)]);
    }
  }

  auto& weights = model.net.weights();
  auto& biases = model.net.biases();
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    m_w.push_back(Eigen::MatrixXd::Zero(weights[l].rows(), weights[l].cols()));
    v_w.push_back(Eigen::MatrixXd::Zero(weights[l].rows(), weights[l].cols()));
    m_b.push_back(Eigen::VectorXd::Zero(biases[l].size()));
    v_b.push_back(Eigen::VectorXd::Zero(biases[l].size()));
  }

  result.train_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  result.val_loss.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<Eigen::Index> batch_order(static_cast<std::size_t>(n_train));
  std::iota(batch_order.begin(), batch_order.end(), 0);

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n_train; start += cfg.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n_train - start);
      Eigen::MatrixXd xb(count, x_train.cols()), yb(count, y_train.cols());
      for (Eigen::Index i = 0; i < count; ++i) {
        xb.row(i) = x_train.row(batch_order[static_cast<std::size_t>(start + i)]);
        yb.row(i) = y_train.row(batch_order[static_cast<std::size_t>(start + i)]);
      }
      const auto grads = model.net.backprop(xb, yb);
      epoch_loss += grads.loss;
      ++batches;
      ++step;

      const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < weights.size(); ++l) {
        m_w[l] = cfg.beta1 * m_w[l] + (1.0 - cfg.beta1) * grads.d_weights[l];
        v_w[l] = cfg.beta2 * v_w[l].array().matrix() +
                 (1.0 - cfg.beta2) * grads.d_weights[l].array().square().matrix();
        m_b[l] = cfg.beta1 * m_b[l] + (1.0 - cfg.beta1) * grads.d_biases[l];
        v_b[l] = cfg.beta2 * v_b[l].array().matrix() +
                 (1.0 - cfg.beta2) * grads.d_biases[l].array().square().matrix();
        weights[l].array() -= cfg.learning_rate * (m_w[l].array() / corr1) /
                              ((v_w[l].array() / corr2).sqrt() + cfg.adam_eps);
        biases[l].array() -= cfg.learning_rate * (m_b[l].array() / corr1) /
                             ((v_b[l].array() / corr2).sqrt() + cfg.adam_eps);
      }
    }

    const double train_loss = epoch_loss / std::max(1, batches);
    const Eigen::MatrixXd val_pred = model.net.forward(x_val);
    const double val_loss = (val_pred - y_val).array().square().mean();
    result.train_loss.push_back(train_loss);
    result.val_loss.push_back(val_loss);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw DivergenceDetected("train: non-finite loss at epoch " + std::to_string(epoch));
    }
  }
  return result;
}

double r2_score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw DimensionMismatch("r2_score: shape mismatch");
  }
  if (targets.rows() < 2) throw DegenerateTargets("r2_score: need at least 2 rows");
  double total = 0.0;
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    const double mean = targets.col(j).mean();
    const double ss_tot = (targets.col(j).array() - mean).square().sum();
    if (ss_tot <= 0.0) throw DegenerateTargets("r2_score: zero target variance");
    const double ss_res = (targets.col(j) - predictions.col(j)).array().square().sum();
    total += 1.0 - ss_res / ss_tot;
  }
  return total / static_cast<double>(targets.cols());
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& node) {
  const auto rows = node.size();
  if (rows == 0) return {};
  const auto cols = node.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = node.at(i).at(j).get<double>();
    }
  }
  return m;
}

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vec_from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string StiffnessModel::to_json() const {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes();
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    j["weights"].push_back(matrix_to_json(net.weights()[l]));
    j["biases"].push_back(vec_to_std(net.biases()[l]));
  }
  j["feature_mean"] = vec_to_std(feature_std.mean);
  j["feature_std"] = vec_to_std(feature_std.std);
  j["target_mean"] = vec_to_std(target_std.mean);
  j["target_std"] = vec_to_std(target_std.std);
  j["clamp"] = {clamp_lo, clamp_hi};
  return j.dump(2);
}

StiffnessModel StiffnessModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StiffnessModel m;
  m.net = Mlp(j.at("layer_sizes").get<std::vector<int>>(), 0);
  auto& w = m.net.weights();
  auto& b = m.net.biases();
  for (std::size_t l = 0; l < w.size(); ++l) {
    w[l] = matrix_from_json(j.at("weights").at(l));
    b[l] = vec_from_std(j.at("biases").at(l).get<std::vector<double>>());
  }
  m.feature_std.mean = vec_from_std(j.at("feature_mean").get<std::vector<double>>());
  m.feature_std.std = vec_from_std(j.at("feature_std").get<std::vector<double>>());
  m.target_std.mean = vec_from_std(j.at("target_mean").get<std::vector<double>>());
  m.target_std.std = vec_from_std(j.at("target_std").get<std::vector<double>>());
  m.clamp_lo = j.at("clamp").at(0).get<double>();
  m.clamp_hi = j.at("clamp").at(1).get<double>();
  return m;
}

void StiffnessModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write model file: " + path);
  out << to_json() << "\n";
}

StiffnessModel StiffnessModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void save_dataset_csv(const StiffnessDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write dataset file: " + path);
  out << "vx,vy,delta,ax,omega,cf,cr\n";
  char buf[512];
  for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  dataset.features(i, 0), dataset.features(i, 1), dataset.features(i, 2),
                  dataset.features(i, 3), dataset.features(i, 4), dataset.targets(i, 0),
                  dataset.targets(i, 1));
    out << buf;
  }
}

StiffnessDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read dataset file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("vx,vy,delta,ax,omega,cf,cr", 0) != 0) {
    throw IoFailure("dataset file missing expected header: " + path);
  }
  std::vector<std::array<double, 7>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 7> row{};
    std::stringstream ss(line);
    std::string field;
    for (int j = 0; j < 7; ++j) {
      if (!std::getline(ss, field, ',')) throw IoFailure("short dataset row: " + line);
      row[static_cast<std::size_t>(j)] = std::stod(field);
    }
    rows.push_back(row);
  }
  StiffnessDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), 5);
  ds.targets.resize(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < 5; ++j) ds.features(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    ds.targets(static_cast<Eigen::Index>(i), 0) = rows[i][5];
    ds.targets(static_cast<Eigen::Index>(i), 1) = rows[i][6];
  }
  return ds;
}

}  // namespace almpc
