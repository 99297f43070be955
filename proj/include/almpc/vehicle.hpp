#pragma once

#include <utility>

#include "almpc/errors.hpp"

namespace almpc {

/// Physical parameters of the single-track vehicle.
struct VehicleParams {
  double m = 1575.0;    // mass [kg]
  double I = 2875.0;    // yaw inertia [kg m^2]
  double lf = 1.2;      // CoG to front axle [m]
  double lr = 1.6;      // CoG to rear axle [m]
  double Cd = 0.29;     // drag coefficient
  double A = 1.6;       // frontal area [m^2]
  double rho = 1.225;   // air density [kg/m^3]
  double mu = 0.82;     // friction coefficient
  double g = 9.81;      // gravity [m/s^2]
  double eps = 1e-3;    // singularity guard speed [m/s]

  bool valid() const {
    return m > 0.0 && I > 0.0 && lf > 0.0 && lr > 0.0 && rho > 0.0 &&
           A > 0.0 && mu > 0.0 && mu <= 1.5 && eps > 0.0;
  }
};

/// Body-frame velocities plus path-tracking errors.
struct VehicleState {
  double vx = 0.0;       // longitudinal velocity [m/s]
  double vy = 0.0;       // lateral velocity [m/s]
  double omega = 0.0;    // yaw rate [rad/s]
  double ye = 0.0;       // lateral position error [m]
  double theta_e = 0.0;  // heading error [rad]
};

struct ControlInput {
  double delta = 0.0;  // steering angle [rad]
  double ax = 0.0;     // longitudinal acceleration command [m/s^2]
};

struct StateDerivative {
  double vx_dot = 0.0;
  double vy_dot = 0.0;
  double omega_dot = 0.0;
  double ye_dot = 0.0;
  double theta_e_dot = 0.0;
};

enum class Axle { Front, Rear };

/// Magic-formula lateral tire curve F = D*sin(C*atan(B*alpha)),
/// with D = mu*Fz per axle from the static load split.
struct PacejkaCoeffs {
  double B = 10.0;  // stiffness factor [1/rad]
  double C = 1.9;   // shape factor
  double Fz_front = 0.0;  // static front axle load [N]
  double Fz_rear = 0.0;   // static rear axle load [N]
  double mu = 0.82;

  static PacejkaCoeffs from_params(const VehicleParams& p, double B = 10.0, double C = 1.9);

  double peak_force(Axle axle) const {
    return mu * (axle == Axle::Front ? Fz_front : Fz_rear);
  }
  /// Small-angle slope dF/dalpha at alpha = 0.
  double linear_stiffness(Axle axle) const { return B * C * peak_force(axle); }
};

/// Front/rear slip angles from the kinematic velocity triangle.
std::pair<double, double> slip_angles(const VehicleState& state, double delta,
                                      const VehicleParams& params);

double pacejka_force(double alpha, const PacejkaCoeffs& coeffs, Axle axle);

/// Rolling + aerodynamic drag. Zero below the standstill speed; wind enters
/// as headwind added to the airspeed.
double drag_force(double vx, double wind_speed, const VehicleParams& params);

/// Nonlinear plant right-hand side. Throws SingularGeometry when the
/// path-frame denominator 1 - ye*k degenerates.
StateDerivative plant_derivative(const VehicleState& state, const ControlInput& u,
                                 double curvature, double wind,
                                 const VehicleParams& params, const PacejkaCoeffs& coeffs);

/// Classical RK4 step with zero-order-hold inputs; vx floored at zero.
VehicleState step_rk4(const VehicleState& state, const ControlInput& u, double curvature,
                      double wind, const VehicleParams& params, const PacejkaCoeffs& coeffs,
                      double dt);

}  // namespace almpc
