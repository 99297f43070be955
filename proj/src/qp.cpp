#include "almpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace almpc {

namespace {

// Rows of G that are +/- a single unit vector encode box bounds; a crossed
// pair means the feasible set is empty no matter what the solver does.
void check_singleton_boxes(const QpProblem& qp) {
  const Eigen::Index n = qp.num_vars();
  std::vector<double> lo(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Eigen::Index r = 0; r < qp.num_constraints(); ++r) {
    Eigen::Index nz = -1;
    bool singleton = true;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (qp.G(r, c) != 0.0) {
        if (nz >= 0) {
          singleton = false;
          break;
        }
        nz = c;
      }
    }
    if (!singleton || nz < 0) continue;
    const double g = qp.G(r, nz);
    if (std::abs(std::abs(g) - 1.0) > 1e-12) continue;
    if (g > 0.0) {
      hi[static_cast<std::size_t>(nz)] = std::min(hi[static_cast<std::size_t>(nz)], qp.h(r));
    } else {
      lo[static_cast<std::size_t>(nz)] = std::max(lo[static_cast<std::size_t>(nz)], -qp.h(r));
    }
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    if (lo[static_cast<std::size_t>(c)] > hi[static_cast<std::size_t>(c)] + 1e-12) {
      throw InfeasibleBounds("solve_qp: contradictory box bounds on variable " +
                             std::to_string(c));
    }
  }
}

// Ruiz equilibration with cost normalization. Produces the scaled problem
// in place and the diagonal scalings D (variables), E (constraints), c (cost).
struct Scaling {
  Eigen::VectorXd D;
  Eigen::VectorXd E;
  double c = 1.0;
};

Scaling ruiz_equilibrate(Eigen::MatrixXd& H, Eigen::VectorXd& f, Eigen::MatrixXd& G,
                         Eigen::VectorXd& h, int passes) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = G.rows();
  Scaling s;
  s.D = Eigen::VectorXd::Ones(n);
  s.E = Eigen::VectorXd::Ones(m);

  const auto safe_rsqrt = [](double v) {
    return (v > 1e-12 && std::isfinite(v)) ? 1.0 / std::sqrt(v) : 1.0;
  };

  for (int pass = 0; pass < passes; ++pass) {
    Eigen::VectorXd delta(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double col_norm = H.col(j).lpNorm<Eigen::Infinity>();
      if (m > 0) col_norm = std::max(col_norm, G.col(j).lpNorm<Eigen::Infinity>());
      delta(j) = safe_rsqrt(col_norm);
    }
    H = delta.asDiagonal() * H * delta.asDiagonal();
    f = delta.asDiagonal() * f;
    if (m > 0) G = G * delta.asDiagonal();
    s.D = s.D.cwiseProduct(delta);

    if (m > 0) {
      Eigen::VectorXd eps(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        eps(i) = safe_rsqrt(G.row(i).lpNorm<Eigen::Infinity>());
      }
      G = eps.asDiagonal() * G;
      h = eps.asDiagonal() * h;
      s.E = s.E.cwiseProduct(eps);
    }

    // cost normalization keeps the objective terms O(1)
    double h_scale = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) h_scale += H.col(j).lpNorm<Eigen::Infinity>();
    h_scale /= static_cast<double>(n);
    const double gamma_inv = std::max(h_scale, f.lpNorm<Eigen::Infinity>());
    const double gamma = (gamma_inv > 1e-12 && std::isfinite(gamma_inv)) ? 1.0 / gamma_inv : 1.0;
    H *= gamma;
    f *= gamma;
    s.c *= gamma;
  }
  return s;
}

// Equality-KKT solve on a candidate active set, in the original problem
// space. Returns true and fills (z, y) when the polished point satisfies the
// full KKT conditions to tol.
bool polish_active_set(const QpProblem& qp, const std::vector<Eigen::Index>& active_in,
                       double tol, Eigen::VectorXd& z_out, Eigen::VectorXd& y_out) {
  const Eigen::Index n = qp.num_vars();
  std::vector<Eigen::Index> active = active_in;
  for (int round = 0; round < 3; ++round) {
    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
    kkt.topLeftCorner(n, n) = qp.H;
    Eigen::VectorXd rhs(n + na);
    rhs.head(n) = -qp.f;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index row = active[static_cast<std::size_t>(a)];
      kkt.block(n + a, 0, 1, n) = qp.G.row(row);
      kkt.block(0, n + a, n, 1) = qp.G.row(row).transpose();
      rhs(n + a) = qp.h(row);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd sol = lu.solve(rhs);

    // drop rows whose multiplier came out negative and retry once or twice
    std::vector<Eigen::Index> keep;
    bool all_nonneg = true;
    for (Eigen::Index a = 0; a < na; ++a) {
      if (sol(n + a) >= -tol) {
        keep.push_back(active[static_cast<std::size_t>(a)]);
      } else {
        all_nonneg = false;
      }
    }
    if (!all_nonneg) {
      active = std::move(keep);
      continue;
    }

    Eigen::VectorXd z = sol.head(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(qp.num_constraints());
    for (Eigen::Index a = 0; a < na; ++a) {
      y(active[static_cast<std::size_t>(a)]) = std::max(sol(n + a), 0.0);
    }
    const double r_prim = (qp.G * z - qp.h).maxCoeff();
    const double r_dual =
        (qp.H * z + qp.f + qp.G.transpose() * y).lpNorm<Eigen::Infinity>();
    if (r_prim <= tol && r_dual <= tol) {
      z_out = std::move(z);
      y_out = std::move(y);
      return true;
    }
    return false;
  }
  return false;
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings,
                    const std::optional<QpWarmStart>& warm) {
  const Eigen::Index n = qp.num_vars();
  const Eigen::Index m = qp.num_constraints();
  if (qp.f.size() != n || qp.G.cols() != n || qp.h.size() != m) {
    throw DimensionMismatch("solve_qp: inconsistent problem dimensions");
  }
  check_singleton_boxes(qp);

  if (m == 0) {
    Eigen::VectorXd sol = (qp.H + settings.sigma * Eigen::MatrixXd::Identity(n, n))
                              .ldlt()
                              .solve(-qp.f);
    return {sol, Eigen::VectorXd::Zero(0), 1, SolveStatus::Optimal, 0.0,
            (qp.H * sol + qp.f).lpNorm<Eigen::Infinity>()};
  }

  // scaled copy of the problem
  Eigen::MatrixXd H = qp.H;
  Eigen::VectorXd f = qp.f;
  Eigen::MatrixXd G = qp.G;
  Eigen::VectorXd h = qp.h;
  const Scaling sc = ruiz_equilibrate(H, f, G, h, 10);
  const Eigen::VectorXd D_inv = sc.D.cwiseInverse();
  const Eigen::VectorXd E_inv = sc.E.cwiseInverse();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  if (warm.has_value() && warm->z.size() == n) z = D_inv.cwiseProduct(warm->z);
  if (warm.has_value() && warm->y.size() == m) y = sc.c * sc.E.cwiseInverse().cwiseProduct(warm->y);

  const Eigen::MatrixXd GtG = G.transpose() * G;
  double rho = settings.rho;
  Eigen::LLT<Eigen::MatrixXd> llt;
  const auto refactor = [&]() {
    llt.compute(H + settings.sigma * Eigen::MatrixXd::Identity(n, n) + rho * GtG);
  };
  refactor();

  Eigen::VectorXd w = (G * z).cwiseMin(h);

  QpSolution best;
  best.z = sc.D.cwiseProduct(z);
  best.y = sc.E.cwiseProduct(y) / sc.c;
  best.status = SolveStatus::MaxIterations;
  double best_score = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    const Eigen::VectorXd rhs = settings.sigma * z - f + G.transpose() * (rho * w - y);
    z = llt.solve(rhs);

    const Eigen::VectorXd Gz = G * z;
    const Eigen::VectorXd Gz_relaxed = settings.alpha * Gz + (1.0 - settings.alpha) * w;
    const Eigen::VectorXd v = Gz_relaxed + y / rho;
    w = v.cwiseMin(h);
    y = rho * (v - w);  // stays elementwise nonnegative by construction

    // unscaled KKT residuals
    const Eigen::VectorXd r_prim_vec = E_inv.cwiseProduct(Gz - w);
    const Eigen::VectorXd r_dual_vec =
        D_inv.cwiseProduct(H * z + f + G.transpose() * y) / sc.c;
    const double r_prim = r_prim_vec.lpNorm<Eigen::Infinity>();
    const double r_dual = r_dual_vec.lpNorm<Eigen::Infinity>();

    const double score = std::max(r_prim, r_dual);
    if (score < best_score) {
      best_score = score;
      best.z = sc.D.cwiseProduct(z);
      best.y = sc.E.cwiseProduct(y) / sc.c;
      best.primal_residual = r_prim;
      best.dual_residual = r_dual;
      best.iterations = iter;
    }

    if (r_prim <= settings.tol && r_dual <= settings.tol) {
      best.z = sc.D.cwiseProduct(z);
      best.y = sc.E.cwiseProduct(y) / sc.c;
      best.primal_residual = r_prim;
      best.dual_residual = r_dual;
      best.status = SolveStatus::Optimal;
      best.iterations = iter;
      return best;
    }

    // periodic polish: an exact KKT solve on the active set the ADMM dual
    // suggests usually terminates well before the residuals grind down
    if (iter % 50 == 0) {
      std::vector<Eigen::Index> active;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (y(i) > 0.0) active.push_back(i);
      }
      Eigen::VectorXd zp, yp;
      if (polish_active_set(qp, active, settings.tol, zp, yp)) {
        best.z = std::move(zp);
        best.y = std::move(yp);
        best.primal_residual = std::max((qp.G * best.z - qp.h).maxCoeff(), 0.0);
        best.dual_residual =
            (qp.H * best.z + qp.f + qp.G.transpose() * best.y).lpNorm<Eigen::Infinity>();
        best.status = SolveStatus::Optimal;
        best.iterations = iter;
        return best;
      }
    }

    if (iter % 25 == 0) {
      const double prim_scale =
          std::max({Gz.lpNorm<Eigen::Infinity>(), w.lpNorm<Eigen::Infinity>(), 1e-10});
      const double dual_scale = std::max({(H * z).lpNorm<Eigen::Infinity>(),
                                          (G.transpose() * y).lpNorm<Eigen::Infinity>(),
                                          f.lpNorm<Eigen::Infinity>(), 1e-10});
      const double rp_rel = (Gz - w).lpNorm<Eigen::Infinity>() / prim_scale;
      const double rd_rel =
          (H * z + f + G.transpose() * y).lpNorm<Eigen::Infinity>() / dual_scale;
      const double factor = std::sqrt(rp_rel / std::max(rd_rel, 1e-16));
      if (factor > 5.0 || factor < 0.2) {
        const double rho_new = std::clamp(rho * factor, 1e-6, 1e6);
        if (rho_new != rho) {
          rho = rho_new;
          refactor();
        }
      }
    }
  }

  // last-chance polish before reporting iteration exhaustion
  {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (y(i) > 0.0) active.push_back(i);
    }
    Eigen::VectorXd zp, yp;
    if (polish_active_set(qp, active, settings.tol, zp, yp)) {
      best.z = std::move(zp);
      best.y = std::move(yp);
      best.primal_residual = std::max((qp.G * best.z - qp.h).maxCoeff(), 0.0);
      best.dual_residual =
          (qp.H * best.z + qp.f + qp.G.transpose() * best.y).lpNorm<Eigen::Infinity>();
      best.status = SolveStatus::Optimal;
      best.iterations = settings.max_iter;
      return best;
    }
  }
  best.iterations = settings.max_iter;
  best.status = SolveStatus::MaxIterations;
  return best;
}

}  // namespace almpc
