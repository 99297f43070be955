#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "almpc/errors.hpp"
#include "almpc/vehicle.hpp"

namespace almpc {

inline constexpr double kMinSchedulingSpeed = 0.1;  // 1/vx floor [m/s]
inline constexpr double kStiffnessMin = 1e4;        // [N/rad]
inline constexpr double kStiffnessMax = 2e5;        // [N/rad]

/// Measured signals that instantiate the LPV matrices.
struct SchedulingVector {
  double delta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double theta_e = 0.0;
  double ye = 0.0;
  double k = 0.0;
};

struct StiffnessPair {
  double cf = 0.0;  // front cornering stiffness [N/rad]
  double cr = 0.0;  // rear cornering stiffness [N/rad]

  StiffnessPair clamped() const;
};

struct LpvMatrices {
  Eigen::Matrix<double, 5, 5> A;
  Eigen::Matrix<double, 5, 2> B;
};

struct DiscreteModel {
  Eigen::Matrix<double, 5, 5> Ad;
  Eigen::Matrix<double, 5, 2> Bd;
  double Ts = 0.0;
};

/// Continuous-time state/input matrices A(psi), B(psi). All 1/vx divisions
/// use vx floored at kMinSchedulingSpeed. Throws DegenerateScheduling when
/// the path-frame denominator degenerates.
LpvMatrices build_lpv(const SchedulingVector& psi, const StiffnessPair& stiff,
                      const VehicleParams& params);

/// Forward-Euler discretization: Ad = I + A*Ts, Bd = B*Ts.
DiscreteModel discretize_euler(const LpvMatrices& m, double Ts);

/// One predicted step from a previous receding-horizon solution, used to
/// schedule the LPV model along the horizon.
struct PredictedStep {
  VehicleState state;
  double delta = 0.0;
};

/// Previous controller iteration's prediction: states 0..Np, inputs 0..Np-1.
struct HorizonPrediction {
  std::vector<VehicleState> states;
  std::vector<ControlInput> inputs;
};

/// Scheduling sequence for the next solve. With a previous prediction the
/// entries are the shifted predicted trajectory (last repeated); on cold
/// start the current measurement with delta = 0 is repeated. Curvatures come
/// from the per-step reference lookahead.
std::vector<SchedulingVector> schedule_horizon(
    const std::optional<HorizonPrediction>& prev, const std::vector<double>& curvatures,
    const VehicleState& current, int Np);

}  // namespace almpc
