#pragma once

#include <Eigen/Dense>
#include <optional>

#include "almpc/errors.hpp"

namespace almpc {

/// Inequality-constrained quadratic program
///   min 0.5 z'Hz + f'z   s.t.  G z <= h
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  Eigen::Index num_vars() const { return H.rows(); }
  Eigen::Index num_constraints() const { return G.rows(); }
};

enum class SolveStatus { Optimal, MaxIterations, InfeasibleRelaxed };

struct QpSolution {
  Eigen::VectorXd z;  // primal
  Eigen::VectorXd y;  // dual multipliers for G z <= h (nonnegative)
  int iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct QpSettings {
  double tol = 1e-6;
  int max_iter = 4000;
  double rho = 1.0;      // initial penalty
  double sigma = 1e-8;   // proximal regularization
  double alpha = 1.6;    // over-relaxation
};

/// Warm-start data carried between receding-horizon solves.
struct QpWarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

/// Deterministic ADMM with over-relaxation and a fixed-schedule adaptive
/// penalty. Terminates when both the primal residual ||Gz - w||_inf and the
/// stationarity residual ||Hz + f + G'y||_inf drop below tol; on iteration
/// exhaustion the best iterate is returned with MaxIterations status.
/// Throws InfeasibleBounds when singleton box rows contradict each other.
QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings = {},
                    const std::optional<QpWarmStart>& warm = std::nullopt);

}  // namespace almpc
