#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "almpc/errors.hpp"
#include "almpc/lpv.hpp"
#include "almpc/vehicle.hpp"

namespace almpc {

/// Per-column affine standardization (zero mean, unit variance).
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Standardizer fit(const Eigen::MatrixXd& data);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& data) const;
};

/// Fully connected perceptron with logistic-sigmoid hidden layers and an
/// identity output layer. Operates on standardized values; weights stored
/// per layer as (out x in).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  /// Batch forward pass: rows are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  struct Gradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
    double loss = 0.0;  // MSE over all elements of the batch
  };
  /// Backpropagated MSE gradients for one batch.
  Gradients backprop(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct TrainConfig {
  int epochs = 2500;
  int batch_size = 64;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> train_loss;         // per epoch
  std::vector<double> val_loss;           // per epoch
  std::vector<Eigen::Index> val_rows;     // dataset rows held out for validation
};

/// Measurable signals fed to the estimator.
struct FeatureVector {
  double vx = 0.0;
  double vy = 0.0;
  double delta = 0.0;
  double ax = 0.0;
  double omega = 0.0;
};

struct StiffnessDataset {
  Eigen::MatrixXd features;  // n x 5: vx, vy, delta, ax, omega
  Eigen::MatrixXd targets;   // n x 2: cf, cr
  std::uint64_t seed = 0;
  int episodes = 0;
};

/// Trained estimator: network plus the standardization constants and the
/// physical clamp applied at the adaptation boundary.
struct StiffnessModel {
  Mlp net;
  Standardizer feature_std;
  Standardizer target_std;
  double clamp_lo = kStiffnessMin;
  double clamp_hi = kStiffnessMax;

  StiffnessPair predict(const FeatureVector& f) const;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& features) const;

  std::string to_json() const;
  static StiffnessModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static StiffnessModel load(const std::string& path);
};

/// Randomized step/sweep steering and drag-compensated acceleration
/// episodes used to label cornering stiffness from the plant's tire curve.
struct ManeuverPlan {
  double dt = 0.033;
  double episode_duration = 4.0;  // [s]
  double speed_min = 5.0;
  double speed_max = 25.0;
  double steer_max = 0.5235987755982988;  // pi/6
  double accel_max = 3.0;                 // net longitudinal accel target [m/s^2]
};

/// Simulates maneuvers and labels each sample with the secant stiffness
/// Fy/alpha of the plant tire curve (analytic slope in the alpha -> 0 limit),
/// clamped to the adaptation range.
StiffnessDataset generate_dataset(const VehicleParams& params, const PacejkaCoeffs& coeffs,
                                  const ManeuverPlan& plan, int n_points, std::uint64_t seed);

/// Standardizes features/targets, splits train/validation, and runs
/// mini-batch Adam on the MSE. Throws DivergenceDetected on non-finite loss.
TrainResult train(StiffnessModel& model, const StiffnessDataset& dataset,
                  const TrainConfig& cfg);

/// Uniform-average R^2 across target columns.
double r2_score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

void save_dataset_csv(const StiffnessDataset& dataset, const std::string& path);
StiffnessDataset load_dataset_csv(const std::string& path);

}  // namespace almpc
