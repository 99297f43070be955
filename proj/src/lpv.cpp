#include "almpc/lpv.hpp"

#include <algorithm>
#include <cmath>

namespace almpc {

StiffnessPair StiffnessPair::clamped() const {
  return {std::clamp(cf, kStiffnessMin, kStiffnessMax),
          std::clamp(cr, kStiffnessMin, kStiffnessMax)};
}

LpvMatrices build_lpv(const SchedulingVector& psi, const StiffnessPair& stiff,
                      const VehicleParams& params) {
  const double denom = 1.0 - psi.ye * psi.k;
  if (std::abs(denom) <= 1e-6) {
    throw DegenerateScheduling("build_lpv: 1 - ye*k is singular");
  }
  if (!std::isfinite(psi.vx) || !std::isfinite(psi.vy) || !std::isfinite(psi.delta)) {
    throw DegenerateScheduling("build_lpv: non-finite scheduling vector");
  }

  const double vx = std::max(psi.vx, kMinSchedulingSpeed);
  const double cf = stiff.cf;
  const double cr = stiff.cr;
  const double m = params.m;
  const double I = params.I;
  const double lf = params.lf;
  const double lr = params.lr;

  const double sd = std::sin(psi.delta);
  const double cd = std::cos(psi.delta);
  const double st = std::sin(psi.theta_e);
  const double ct = std::cos(psi.theta_e);

  LpvMatrices out;
  out.A.setZero();
  out.B.setZero();

  out.A(0, 0) = -params.mu * params.g / vx - params.rho * params.Cd * params.A * vx / (2.0 * m);
  out.A(0, 1) = cf * sd / (m * vx);
  out.A(0, 2) = cf * lf * sd / (m * vx) + psi.vy;
  out.A(1, 1) = -(cr + cf * cd) / (m * vx);
  out.A(1, 2) = -(cf * lf * cd - cr * lr) / (m * vx) - vx;
  out.A(2, 1) = -(cf * lf * cd - cr * lr) / (I * vx);
  out.A(2, 2) = -(cf * lf * lf * cd + cr * lr * lr) / (I * vx);
  out.A(3, 0) = st;
  out.A(3, 1) = ct;
  out.A(4, 0) = -psi.k * ct / denom;
  out.A(4, 1) = psi.k * st / denom;
  out.A(4, 2) = 1.0;

  out.B(0, 0) = -cf * sd / m;
  out.B(0, 1) = 1.0;
  out.B(1, 0) = cf * cd / m;
  out.B(2, 0) = cf * lf * cd / I;
  return out;
}

DiscreteModel discretize_euler(const LpvMatrices& m, double Ts) {
  DiscreteModel d;
  d.Ad = Eigen::Matrix<double, 5, 5>::Identity() + m.A * Ts;
  d.Bd = m.B * Ts;
  d.Ts = Ts;
  return d;
}

std::vector<SchedulingVector> schedule_horizon(
    const std::optional<HorizonPrediction>& prev, const std::vector<double>& curvatures,
    const VehicleState& current, int Np) {
  std::vector<SchedulingVector> out(static_cast<std::size_t>(Np));
  const auto curvature = [&](int i) {
    if (curvatures.empty()) return 0.0;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(i), curvatures.size() - 1);
    return curvatures[idx];
  };

  if (!prev.has_value() || prev->states.empty()) {
    for (int i = 0; i < Np; ++i) {
      out[static_cast<std::size_t>(i)] = {0.0, current.vx, current.vy,
                                          current.theta_e, current.ye, curvature(i)};
    }
    return out;
  }

  const auto& states = prev->states;
  const auto& inputs = prev->inputs;
  for (int i = 0; i < Np; ++i) {
    // shifted one step: entry i reuses the previous prediction at i+1
    const auto si = std::min<std::size_t>(static_cast<std::size_t>(i) + 1, states.size() - 1);
    const VehicleState& x = states[si];
    double delta = 0.0;
    if (!inputs.empty()) {
      const auto ui = std::min<std::size_t>(static_cast<std::size_t>(i) + 1, inputs.size() - 1);
      delta = inputs[ui].delta;
    }
    out[static_cast<std::size_t>(i)] = {delta, x.vx, x.vy, x.theta_e, x.ye, curvature(i)};
  }
  return out;
}

}  // namespace almpc
