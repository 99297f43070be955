#pragma once

// Test-side QP oracles, independent of the production solver path:
//  - box_qp_projected_gradient: plain projected gradient for box-constrained
//    QPs (projection is elementwise clipping).
//  - dual_pg_oracle: accelerated projected gradient on the dual of a general
//    inequality QP (projection onto lambda >= 0), followed by an exact KKT
//    solve on the identified active set.
// Plus a deterministic generator of random condensed MPC problems.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "almpc/mpc.hpp"
#include "almpc/qp.hpp"

namespace qp_oracle {

inline Eigen::VectorXd box_qp_projected_gradient(const Eigen::MatrixXd& H,
                                                 const Eigen::VectorXd& f,
                                                 const Eigen::VectorXd& lo,
                                                 const Eigen::VectorXd& hi, double tol = 1e-10,
                                                 int max_iter = 2000000) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double L = es.eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(L, 1e-12);
  Eigen::VectorXd z = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = H * z + f;
    Eigen::VectorXd next = (z - step * grad).cwiseMax(lo).cwiseMin(hi);
    if ((next - z).lpNorm<Eigen::Infinity>() < tol * step) return next;
    z = next;
  }
  return z;
}

// Accelerated projected gradient on the (negated) dual
//   min_{lambda >= 0} 0.5 l' (G H^-1 G') l + (G H^-1 f + h)' l
// then an exact equality-constrained KKT solve on the active rows.
inline Eigen::VectorXd dual_pg_oracle(const almpc::QpProblem& qp, int iters = 20000) {
  const Eigen::LLT<Eigen::MatrixXd> hll(qp.H);
  const Eigen::MatrixXd HiGt = hll.solve(qp.G.transpose());
  const Eigen::MatrixXd K = qp.G * HiGt;  // dual Hessian (PSD)
  const Eigen::VectorXd Hif = hll.solve(qp.f);
  const Eigen::VectorXd c = qp.G * Hif + qp.h;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / L;

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(qp.G.rows());
  Eigen::VectorXd momentum = lambda;
  double t_acc = 1.0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = K * momentum + c;
    Eigen::VectorXd next = (momentum - step * grad).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    momentum = next + ((t_acc - 1.0) / t_next) * (next - lambda);
    lambda = next;
    t_acc = t_next;
  }

  // exact refinement seeded by the dual iterate: iterate the candidate
  // active set, dropping rows with negative multipliers and adding rows the
  // trial point violates, until the KKT conditions hold
  const Eigen::VectorXd z_pg = -hll.solve(qp.f + qp.G.transpose() * lambda);
  const Eigen::Index n = qp.H.rows();
  const Eigen::Index m = qp.G.rows();

  std::vector<bool> active(static_cast<std::size_t>(m), false);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lambda(i) > 1e-9 || qp.G.row(i) * z_pg - qp.h(i) > -1e-9) {
      active[static_cast<std::size_t>(i)] = true;
    }
  }

  Eigen::VectorXd z_best = z_pg;
  for (int round = 0; round < 60; ++round) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (active[static_cast<std::size_t>(i)]) rows.push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
    kkt.topLeftCorner(n, n) = qp.H;
    Eigen::VectorXd rhs(n + na);
    rhs.head(n) = -qp.f;
    for (Eigen::Index a = 0; a < na; ++a) {
      kkt.block(n + a, 0, 1, n) = qp.G.row(rows[static_cast<std::size_t>(a)]);
      kkt.block(0, n + a, n, 1) = qp.G.row(rows[static_cast<std::size_t>(a)]).transpose();
      rhs(n + a) = qp.h(rows[static_cast<std::size_t>(a)]);
    }
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd z_ref = sol.head(n);

    bool changed = false;
    // drop the most negative multiplier
    Eigen::Index drop = -1;
    double most_negative = -1e-9;
    for (Eigen::Index a = 0; a < na; ++a) {
      if (sol(n + a) < most_negative) {
        most_negative = sol(n + a);
        drop = rows[static_cast<std::size_t>(a)];
      }
    }
    if (drop >= 0) {
      active[static_cast<std::size_t>(drop)] = false;
      changed = true;
    } else {
      // add the most violated inactive row
      Eigen::Index add = -1;
      double worst = 1e-9;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (active[static_cast<std::size_t>(i)]) continue;
        const double viol = qp.G.row(i) * z_ref - qp.h(i);
        if (viol > worst) {
          worst = viol;
          add = i;
        }
      }
      if (add >= 0) {
        active[static_cast<std::size_t>(add)] = true;
        changed = true;
      }
    }
    if (!changed) return z_ref;  // KKT holds: feasible with nonnegative duals
    z_best = z_ref;
  }
  return z_best;
}

/// Random condensed MPC problem with the production structure (increment,
/// absolute and soft-band rows plus one slack).
inline almpc::QpProblem random_condensed_qp(std::mt19937_64& rng, int Np) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto rnd = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  almpc::CondensedMpc c;
  const int nx = 5, nu = 2;
  for (int i = 0; i < Np; ++i) {
    Eigen::MatrixXd Ad = Eigen::MatrixXd::Identity(nx, nx);
    Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(nx, nu);
    for (int r = 0; r < nx; ++r) {
      for (int cc = 0; cc < nx; ++cc) Ad(r, cc) += 0.2 * rnd(-1.0, 1.0);
      for (int cc = 0; cc < nu; ++cc) Bd(r, cc) = 0.5 * rnd(-1.0, 1.0);
    }
    c.Ad.push_back(Ad);
    c.Bd.push_back(Bd);
  }
  c.x0 = Eigen::VectorXd::NullaryExpr(nx, [&](Eigen::Index) { return rnd(-1.0, 1.0); });
  for (int i = 0; i < Np; ++i) {
    c.refs.push_back(
        Eigen::VectorXd::NullaryExpr(nx, [&](Eigen::Index) { return rnd(-1.0, 1.0); }));
  }
  c.q_diag = Eigen::VectorXd::NullaryExpr(nx, [&](Eigen::Index) { return rnd(0.01, 5.0); });
  c.r_diag = Eigen::VectorXd::NullaryExpr(nu, [&](Eigen::Index) { return rnd(0.01, 1.0); });
  const double du = rnd(0.1, 1.0);
  const double uu = rnd(0.5, 3.0);
  c.du_max = Eigen::VectorXd::Constant(nu, du);
  c.du_min = -c.du_max;
  c.u_max = Eigen::VectorXd::Constant(nu, uu);
  c.u_min = -c.u_max;
  c.u_prev = Eigen::VectorXd::NullaryExpr(nu, [&](Eigen::Index) { return rnd(-0.4, 0.4) * uu; });
  c.soft_state_index = 3;
  c.soft_bound = rnd(0.2, 1.0);
  c.slack_weight = rnd(1e3, 1e5);
  return almpc::condense(c);
}

}  // namespace qp_oracle
