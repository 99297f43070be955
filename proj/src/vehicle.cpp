#include "almpc/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace almpc {

namespace {
constexpr double kStandstillSpeed = 0.1;  // below this, drag is zeroed
constexpr double kGeometryTol = 1e-6;
}  // namespace

PacejkaCoeffs PacejkaCoeffs::from_params(const VehicleParams& p, double B, double C) {
  PacejkaCoeffs c;
  c.B = B;
  c.C = C;
  c.mu = p.mu;
  const double wheelbase = p.lf + p.lr;
  c.Fz_front = p.m * p.g * p.lr / wheelbase;
  c.Fz_rear = p.m * p.g * p.lf / wheelbase;
  return c;
}

std::pair<double, double> slip_angles(const VehicleState& state, double delta,
                                      const VehicleParams& params) {
  const double denom = state.vx + params.eps;
  const double alpha_f = delta - std::atan((state.vy + params.lf * state.omega) / denom);
  const double alpha_r = -std::atan((state.vy - params.lr * state.omega) / denom);
  return {alpha_f, alpha_r};
}

double pacejka_force(double alpha, const PacejkaCoeffs& coeffs, Axle axle) {
  const double D = coeffs.peak_force(axle);
  return D * std::sin(coeffs.C * std::atan(coeffs.B * alpha));
}

double drag_force(double vx, double wind_speed, const VehicleParams& params) {
  if (vx < kStandstillSpeed) return 0.0;
  const double airspeed = vx + wind_speed;
  return params.mu * params.m * params.g +
         0.5 * params.rho * params.Cd * params.A * airspeed * airspeed;
}

StateDerivative plant_derivative(const VehicleState& state, const ControlInput& u,
                                 double curvature, double wind,
                                 const VehicleParams& params, const PacejkaCoeffs& coeffs) {
  const double denom = 1.0 - state.ye * curvature;
  if (std::abs(denom) <= kGeometryTol) {
    throw SingularGeometry("plant_derivative: 1 - ye*k is singular");
  }

  const auto [alpha_f, alpha_r] = slip_angles(state, u.delta, params);
  const double Fyf = pacejka_force(alpha_f, coeffs, Axle::Front);
  const double Fyr = pacejka_force(alpha_r, coeffs, Axle::Rear);
  const double Fd = drag_force(state.vx, wind, params);

  const double sd = std::sin(u.delta);
  const double cd = std::cos(u.delta);
  const double st = std::sin(state.theta_e);
  const double ct = std::cos(state.theta_e);

  StateDerivative d;
  d.vx_dot = u.ax + state.omega * state.vy - (Fyf * sd + Fd) / params.m;
  d.vy_dot = (Fyf * cd + Fyr) / params.m - state.omega * state.vx;
  d.omega_dot = (Fyf * params.lf * cd - Fyr * params.lr) / params.I;
  d.ye_dot = state.vx * st + state.vy * ct;
  d.theta_e_dot = state.omega - curvature * (state.vx * ct - state.vy * st) / denom;
  return d;
}

namespace {

VehicleState axpy(const VehicleState& s, const StateDerivative& d, double h) {
  VehicleState r;
  r.vx = s.vx + h * d.vx_dot;
  r.vy = s.vy + h * d.vy_dot;
  r.omega = s.omega + h * d.omega_dot;
  r.ye = s.ye + h * d.ye_dot;
  r.theta_e = s.theta_e + h * d.theta_e_dot;
  return r;
}

}  // namespace

VehicleState step_rk4(const VehicleState& state, const ControlInput& u, double curvature,
                      double wind, const VehicleParams& params, const PacejkaCoeffs& coeffs,
                      double dt) {
  const StateDerivative k1 = plant_derivative(state, u, curvature, wind, params, coeffs);
  const StateDerivative k2 =
      plant_derivative(axpy(state, k1, 0.5 * dt), u, curvature, wind, params, coeffs);
  const StateDerivative k3 =
      plant_derivative(axpy(state, k2, 0.5 * dt), u, curvature, wind, params, coeffs);
  const StateDerivative k4 =
      plant_derivative(axpy(state, k3, dt), u, curvature, wind, params, coeffs);

  VehicleState next;
  const double h = dt / 6.0;
  next.vx = state.vx + h * (k1.vx_dot + 2.0 * k2.vx_dot + 2.0 * k3.vx_dot + k4.vx_dot);
  next.vy = state.vy + h * (k1.vy_dot + 2.0 * k2.vy_dot + 2.0 * k3.vy_dot + k4.vy_dot);
  next.omega =
      state.omega + h * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);
  next.ye = state.ye + h * (k1.ye_dot + 2.0 * k2.ye_dot + 2.0 * k3.ye_dot + k4.ye_dot);
  next.theta_e = state.theta_e + h * (k1.theta_e_dot + 2.0 * k2.theta_e_dot +
                                      2.0 * k3.theta_e_dot + k4.theta_e_dot);
  next.vx = std::max(next.vx, 0.0);
  return next;
}

}  // namespace almpc
