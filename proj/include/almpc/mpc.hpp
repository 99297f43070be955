#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <optional>
#include <vector>

#include "almpc/lpv.hpp"
#include "almpc/qp.hpp"
#include "almpc/vehicle.hpp"

namespace almpc {

struct MpcConfig {
  int Np = 10;
  double Ts = 0.033;
  Eigen::Matrix<double, 5, 1> q_diag{1.0, 0.0, 0.1, 8.0, 3.0};
  Eigen::Vector2d r_diag{0.05, 0.01};
  // input order: [delta, ax]
  Eigen::Vector2d u_min{-std::numbers::pi / 6.0, -12.0};
  Eigen::Vector2d u_max{std::numbers::pi / 6.0, 12.0};
  Eigen::Vector2d du_min{-std::numbers::pi / 12.0, -1.0};
  Eigen::Vector2d du_max{std::numbers::pi / 12.0, 1.0};
  double ye_bound = 0.3;        // soft lateral band [m]
  double slack_weight = 1e4;
  double qp_tol = 1e-6;
  int qp_max_iter = 4000;

  bool valid() const;
};

/// Per-step references over the horizon. The tracked 5-vector at step i is
/// [v_ref, 0, v_ref*k, 0, 0] (curvature feedforward on the yaw rate).
struct ReferenceWindow {
  std::vector<double> v_ref;      // length Np
  std::vector<double> curvature;  // length Np

  int size() const { return static_cast<int>(v_ref.size()); }
  Eigen::Matrix<double, 5, 1> state_ref(int i) const {
    return {v_ref[static_cast<std::size_t>(i)], 0.0,
            v_ref[static_cast<std::size_t>(i)] * curvature[static_cast<std::size_t>(i)], 0.0,
            0.0};
  }
};

/// Horizon optimization data condensed into a dense QP over the control
/// increments (plus one slack when a soft state band is configured).
struct CondensedMpc {
  std::vector<Eigen::MatrixXd> Ad;    // Np of nx x nx
  std::vector<Eigen::MatrixXd> Bd;    // Np of nx x nu
  Eigen::VectorXd x0;                 // nx
  std::vector<Eigen::VectorXd> refs;  // Np of nx
  Eigen::VectorXd u_prev;             // nu
  Eigen::VectorXd q_diag;             // nx
  Eigen::VectorXd r_diag;             // nu
  Eigen::VectorXd u_min, u_max, du_min, du_max;  // nu
  int soft_state_index = -1;          // -1 disables the soft band + slack
  double soft_bound = 0.0;
  double slack_weight = 0.0;
};

/// Eliminates the states through the prediction model and returns the dense
/// QP over z = [dU; s]. The fixed current-state stage cost is dropped as a
/// constant offset.
QpProblem condense(const CondensedMpc& c);

struct MpcSolution {
  ControlInput u0;                          // applied input
  Eigen::MatrixXd delta_u_sequence;         // Np x 2
  std::vector<VehicleState> predicted_states;  // Np+1
  std::vector<ControlInput> predicted_inputs;  // Np
  double slack = 0.0;
  int qp_iterations = 0;
  double solve_time = 0.0;  // wall seconds around the whole step
  SolveStatus status = SolveStatus::Optimal;
  QpWarmStart warm;  // opaque warm-start data owned by the caller's loop
};

/// One receding-horizon update: schedule the LPV model from the previous
/// prediction, discretize, condense, solve, and return the first input
/// (defensively clamped to bounds).
MpcSolution mpc_step(const VehicleState& x, const StiffnessPair& stiff,
                     const ReferenceWindow& refs, const ControlInput& u_prev,
                     const std::optional<MpcSolution>& prev, const MpcConfig& cfg,
                     const VehicleParams& params);

}  // namespace almpc
