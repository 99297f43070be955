#include "almpc/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace almpc {

bool MpcConfig::valid() const {
  if (Np < 1 || Ts <= 0.0 || slack_weight <= 0.0) return false;
  if ((q_diag.array() < 0.0).any() || (r_diag.array() < 0.0).any()) return false;
  for (int i = 0; i < 2; ++i) {
    if (u_min(i) >= u_max(i) || du_min(i) >= du_max(i)) return false;
  }
  return ye_bound > 0.0 && qp_tol > 0.0 && qp_max_iter > 0;
}

QpProblem condense(const CondensedMpc& c) {
  const int Np = static_cast<int>(c.Ad.size());
  if (Np == 0 || c.Bd.size() != c.Ad.size() || static_cast<int>(c.refs.size()) != Np) {
    throw DimensionMismatch("condense: horizon arrays disagree");
  }
  const Eigen::Index nx = c.x0.size();
  const Eigen::Index nu = c.u_prev.size();
  for (int i = 0; i < Np; ++i) {
    if (c.Ad[static_cast<std::size_t>(i)].rows() != nx ||
        c.Ad[static_cast<std::size_t>(i)].cols() != nx ||
        c.Bd[static_cast<std::size_t>(i)].rows() != nx ||
        c.Bd[static_cast<std::size_t>(i)].cols() != nu) {
      throw DimensionMismatch("condense: model dimensions disagree with x0/u_prev");
    }
  }
  const bool soft = c.soft_state_index >= 0;
  const Eigen::Index n_du = nu * Np;
  const Eigen::Index n_z = n_du + (soft ? 1 : 0);

  const Eigen::MatrixXd Q = c.q_diag.asDiagonal();
  const Eigen::MatrixXd R = c.r_diag.asDiagonal();

  // x_i = F[i] + Gm[i] * dU  (affine in the stacked increments)
  std::vector<Eigen::VectorXd> F(static_cast<std::size_t>(Np) + 1);
  std::vector<Eigen::MatrixXd> Gm(static_cast<std::size_t>(Np) + 1);
  F[0] = c.x0;
  Gm[0] = Eigen::MatrixXd::Zero(nx, n_du);
  for (int i = 0; i < Np; ++i) {
    const auto& Ad = c.Ad[static_cast<std::size_t>(i)];
    const auto& Bd = c.Bd[static_cast<std::size_t>(i)];
    F[static_cast<std::size_t>(i) + 1] = Ad * F[static_cast<std::size_t>(i)] + Bd * c.u_prev;
    Gm[static_cast<std::size_t>(i) + 1] = Ad * Gm[static_cast<std::size_t>(i)];
    for (int j = 0; j <= i; ++j) {
      Gm[static_cast<std::size_t>(i) + 1].middleCols(nu * j, nu) += Bd;
    }
  }

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_du, n_du);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n_du);
  for (int i = 1; i < Np; ++i) {
    const auto& Gi = Gm[static_cast<std::size_t>(i)];
    P.noalias() += Gi.transpose() * Q * Gi;
    q.noalias() += Gi.transpose() * Q * (F[static_cast<std::size_t>(i)] - c.refs[static_cast<std::size_t>(i)]);
  }
  // terminal cost on the tracking error at Np, against the last reference
  {
    const auto& Gn = Gm[static_cast<std::size_t>(Np)];
    P.noalias() += Gn.transpose() * Q * Gn;
    q.noalias() += Gn.transpose() * Q * (F[static_cast<std::size_t>(Np)] - c.refs.back());
  }
  for (int i = 0; i < Np; ++i) {
    P.block(nu * i, nu * i, nu, nu) += R;
  }
  P = 0.5 * (P + P.transpose()).eval();  // exact symmetry regardless of blocking

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n_z, n_z);
  qp.H.topLeftCorner(n_du, n_du) = 2.0 * P;
  qp.f = Eigen::VectorXd::Zero(n_z);
  qp.f.head(n_du) = 2.0 * q;
  if (soft) {
    qp.H(n_du, n_du) = 2.0 * c.slack_weight;
  }

  const Eigen::Index n_rows = 4 * nu * Np + (soft ? 2 * Np + 1 : 0);
  qp.G = Eigen::MatrixXd::Zero(n_rows, n_z);
  qp.h = Eigen::VectorXd::Zero(n_rows);
  Eigen::Index row = 0;

  // increment bounds
  for (int i = 0; i < Np; ++i) {
    for (Eigen::Index j = 0; j < nu; ++j) {
      qp.G(row, nu * i + j) = 1.0;
      qp.h(row++) = c.du_max(j);
      qp.G(row, nu * i + j) = -1.0;
      qp.h(row++) = -c.du_min(j);
    }
  }
  // absolute input bounds via cumulative sums
  for (int i = 0; i < Np; ++i) {
    for (Eigen::Index j = 0; j < nu; ++j) {
      for (int l = 0; l <= i; ++l) qp.G(row, nu * l + j) = 1.0;
      qp.h(row++) = c.u_max(j) - c.u_prev(j);
      for (int l = 0; l <= i; ++l) qp.G(row, nu * l + j) = -1.0;
      qp.h(row++) = c.u_prev(j) - c.u_min(j);
    }
  }
  // soft band on one predicted state, one shared nonnegative slack
  if (soft) {
    const Eigen::Index si = c.soft_state_index;
    for (int i = 1; i <= Np; ++i) {
      const auto& Gi = Gm[static_cast<std::size_t>(i)];
      const double Fi = F[static_cast<std::size_t>(i)](si);
      qp.G.block(row, 0, 1, n_du) = Gi.row(si);
      qp.G(row, n_du) = -1.0;
      qp.h(row++) = c.soft_bound - Fi;
      qp.G.block(row, 0, 1, n_du) = -Gi.row(si);
      qp.G(row, n_du) = -1.0;
      qp.h(row++) = c.soft_bound + Fi;
    }
    qp.G(row, n_du) = -1.0;
    qp.h(row++) = 0.0;
  }
  return qp;
}

namespace {

Eigen::Matrix<double, 5, 1> to_vec(const VehicleState& s) {
  return {s.vx, s.vy, s.omega, s.ye, s.theta_e};
}

VehicleState to_state(const Eigen::Matrix<double, 5, 1>& v) {
  return {v(0), v(1), v(2), v(3), v(4)};
}

}  // namespace

MpcSolution mpc_step(const VehicleState& x, const StiffnessPair& stiff,
                     const ReferenceWindow& refs, const ControlInput& u_prev,
                     const std::optional<MpcSolution>& prev, const MpcConfig& cfg,
                     const VehicleParams& params) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!cfg.valid()) throw ConfigError("mpc_step: invalid MpcConfig");
  if (refs.size() != cfg.Np || refs.curvature.size() != refs.v_ref.size()) {
    throw DimensionMismatch("mpc_step: reference window length != Np");
  }
  const int Np = cfg.Np;

  std::optional<HorizonPrediction> horizon;
  if (prev.has_value() && !prev->predicted_states.empty()) {
    horizon = HorizonPrediction{prev->predicted_states, prev->predicted_inputs};
  }
  const auto sched = schedule_horizon(horizon, refs.curvature, x, Np);

  const StiffnessPair cs = stiff.clamped();
  CondensedMpc c;
  c.Ad.reserve(static_cast<std::size_t>(Np));
  c.Bd.reserve(static_cast<std::size_t>(Np));
  std::vector<DiscreteModel> models;
  models.reserve(static_cast<std::size_t>(Np));
  for (int i = 0; i < Np; ++i) {
    const DiscreteModel dm =
        discretize_euler(build_lpv(sched[static_cast<std::size_t>(i)], cs, params), cfg.Ts);
    models.push_back(dm);
    c.Ad.emplace_back(dm.Ad);
    c.Bd.emplace_back(dm.Bd);
  }

  // keep the QP feasible if the caller hands us an out-of-bounds input
  Eigen::Vector2d u_prev_v{u_prev.delta, u_prev.ax};
  bool relaxed = false;
  for (int j = 0; j < 2; ++j) {
    const double clamped = std::clamp(u_prev_v(j), cfg.u_min(j), cfg.u_max(j));
    if (clamped != u_prev_v(j)) relaxed = true;
    u_prev_v(j) = clamped;
  }

  c.x0 = to_vec(x);
  c.refs.reserve(static_cast<std::size_t>(Np));
  for (int i = 0; i < Np; ++i) c.refs.emplace_back(refs.state_ref(i));
  c.u_prev = u_prev_v;
  c.q_diag = cfg.q_diag;
  c.r_diag = cfg.r_diag;
  c.u_min = cfg.u_min;
  c.u_max = cfg.u_max;
  c.du_min = cfg.du_min;
  c.du_max = cfg.du_max;
  c.soft_state_index = 3;  // ye
  c.soft_bound = cfg.ye_bound;
  c.slack_weight = cfg.slack_weight;

  const QpProblem qp = condense(c);

  std::optional<QpWarmStart> warm;
  if (prev.has_value() && prev->warm.z.size() == qp.num_vars() &&
      prev->warm.y.size() == qp.num_constraints()) {
    // shift the increment sequence one step, repeat the tail
    QpWarmStart w = prev->warm;
    for (int i = 0; i + 1 < Np; ++i) {
      w.z.segment(2 * i, 2) = prev->warm.z.segment(2 * (i + 1), 2);
    }
    warm = std::move(w);
  }

  QpSettings settings;
  settings.tol = cfg.qp_tol;
  settings.max_iter = cfg.qp_max_iter;
  const QpSolution sol = solve_qp(qp, settings, warm);

  MpcSolution out;
  out.qp_iterations = sol.iterations;
  out.status = relaxed ? SolveStatus::InfeasibleRelaxed : sol.status;
  out.warm.z = sol.z;
  out.warm.y = sol.y;
  out.slack = sol.z(2 * Np);

  out.delta_u_sequence.resize(Np, 2);
  for (int i = 0; i < Np; ++i) {
    out.delta_u_sequence.row(i) = sol.z.segment(2 * i, 2).transpose();
  }

  // first input, defensively clamped to both increment and absolute bounds
  Eigen::Vector2d du0 = sol.z.head(2);
  for (int j = 0; j < 2; ++j) du0(j) = std::clamp(du0(j), cfg.du_min(j), cfg.du_max(j));
  Eigen::Vector2d u0 = u_prev_v + du0;
  for (int j = 0; j < 2; ++j) u0(j) = std::clamp(u0(j), cfg.u_min(j), cfg.u_max(j));
  out.u0 = {u0(0), u0(1)};

  // prediction-model rollout of the optimal sequence
  out.predicted_states.reserve(static_cast<std::size_t>(Np) + 1);
  out.predicted_inputs.reserve(static_cast<std::size_t>(Np));
  Eigen::Matrix<double, 5, 1> xi = c.x0;
  Eigen::Vector2d ui = u_prev_v;
  out.predicted_states.push_back(to_state(xi));
  for (int i = 0; i < Np; ++i) {
    ui += sol.z.segment(2 * i, 2);
    out.predicted_inputs.push_back({ui(0), ui(1)});
    xi = models[static_cast<std::size_t>(i)].Ad * xi + models[static_cast<std::size_t>(i)].Bd * ui;
    out.predicted_states.push_back(to_state(xi));
  }

  out.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace almpc
