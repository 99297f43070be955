#include <doctest.h>

#include <cmath>
#include <random>

#include "almpc/vehicle.hpp"

using namespace almpc;

namespace {

VehicleParams table_params() { return VehicleParams{}; }

PacejkaCoeffs default_tire() { return PacejkaCoeffs::from_params(table_params()); }

}  // namespace

TEST_CASE("static axle loads split the weight by lever arms") {
  const auto p = table_params();
  const auto tire = default_tire();
  CHECK(tire.Fz_front == doctest::Approx(8829.0).epsilon(1e-12));
  CHECK(tire.Fz_rear == doctest::Approx(6621.75).epsilon(1e-12));
  CHECK(tire.Fz_front + tire.Fz_rear == doctest::Approx(p.m * p.g).epsilon(1e-9));
  CHECK(tire.peak_force(Axle::Front) == doctest::Approx(7239.78).epsilon(1e-12));
}

TEST_CASE("slip angles: straight symmetric motion gives zero") {
  VehicleState s;
  s.vx = 10.0;
  const auto [af, ar] = slip_angles(s, 0.0, table_params());
  CHECK(af == 0.0);
  CHECK(ar == 0.0);
}

TEST_CASE("slip angles: frozen direct-evaluation values") {
  // oracle: atan evaluation at vx=10, vy=0.5, omega=0.2, delta=0.05, eps=1e-3
  VehicleState s;
  s.vx = 10.0;
  s.vy = 0.5;
  s.omega = 0.2;
  const auto [af, ar] = slip_angles(s, 0.05, table_params());
  CHECK(af == doctest::Approx(-0.02385800843971816).epsilon(1e-12));
  CHECK(ar == doctest::Approx(-0.01799625714070270).epsilon(1e-12));
}

TEST_CASE("slip angles: odd symmetry in (vy, omega, delta)") {
  const auto p = table_params();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VehicleState s;
    s.vx = 1.0 + 24.0 * (u(rng) * 0.5 + 0.5);
    s.vy = 3.0 * u(rng);
    s.omega = 1.0 * u(rng);
    const double delta = 0.5 * u(rng);
    VehicleState neg = s;
    neg.vy = -s.vy;
    neg.omega = -s.omega;
    const auto [af, ar] = slip_angles(s, delta, p);
    const auto [af_n, ar_n] = slip_angles(neg, -delta, p);
    CHECK(af_n == doctest::Approx(-af).epsilon(1e-14));
    CHECK(ar_n == doctest::Approx(-ar).epsilon(1e-14));
  }
}

TEST_CASE("pacejka: zero at zero, odd, bounded by peak") {
  const auto tire = default_tire();
  CHECK(pacejka_force(0.0, tire, Axle::Front) == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double D = tire.peak_force(Axle::Front);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng);
    const double f = pacejka_force(a, tire, Axle::Front);
    CHECK(std::abs(f) <= D + 1e-12);
    CHECK(pacejka_force(-a, tire, Axle::Front) == doctest::Approx(-f).epsilon(1e-14));
  }
}

TEST_CASE("pacejka: small-angle slope equals B*C*D") {
  const auto tire = default_tire();
  // analytic: d/da [D sin(C atan(B a))] at 0 = B*C*D = 137555.82 front
  const double slope = tire.linear_stiffness(Axle::Front);
  CHECK(slope == doctest::Approx(137555.82).epsilon(1e-12));
  const double h = 1e-6;
  const double fd = (pacejka_force(h, tire, Axle::Front) - pacejka_force(-h, tire, Axle::Front)) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(slope).epsilon(1e-6));
}

TEST_CASE("pacejka: linear-region agreement under half a degree") {
  const auto tire = default_tire();
  const double bcd = tire.linear_stiffness(Axle::Rear);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5 * M_PI / 180.0, 0.5 * M_PI / 180.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double f = pacejka_force(a, tire, Axle::Rear);
    CHECK(std::abs(f - bcd * a) / (std::abs(bcd * a) + 1e-9) < 0.01);
  }
}

TEST_CASE("drag: standstill rule and frozen value at 10 m/s") {
  const auto p = table_params();
  CHECK(drag_force(0.0, 0.0, p) == 0.0);
  CHECK(drag_force(0.0999, 30.0, p) == 0.0);
  const double f = drag_force(10.0, 0.0, p);
  CHECK(f == doctest::Approx(12698.035).epsilon(1e-12));
  CHECK(p.mu * p.m * p.g == doctest::Approx(12669.615).epsilon(1e-12));
}

TEST_CASE("drag: wind scales only the aerodynamic term") {
  const auto p = table_params();
  const double rolling = p.mu * p.m * p.g;
  const double aero10 = drag_force(10.0, 0.0, p) - rolling;
  const double aero35 = drag_force(10.0, 25.0, p) - rolling;
  CHECK(aero35 / aero10 == doctest::Approx(35.0 * 35.0 / 100.0).epsilon(1e-12));
}

TEST_CASE("plant derivative: straight-line symmetric motion") {
  const auto p = table_params();
  const auto tire = default_tire();
  VehicleState s;
  s.vx = 10.0;
  const ControlInput u{0.0, 1.5};
  const auto d = plant_derivative(s, u, 0.0, 0.0, p, tire);
  CHECK(d.ye_dot == 0.0);
  CHECK(d.theta_e_dot == 0.0);
  CHECK(d.vy_dot == 0.0);
  CHECK(d.omega_dot == 0.0);
  CHECK(d.vx_dot == doctest::Approx(1.5 - drag_force(10.0, 0.0, p) / p.m).epsilon(1e-14));
}

TEST_CASE("plant derivative: frozen full-vector oracle") {
  // independent scalar-by-scalar evaluation of the model equations at
  // state=[10,0.5,0.1,0.05,0.02], u=(0.03,0.5), k=0.01, wind=0
  const auto p = table_params();
  const auto tire = default_tire();
  const VehicleState s{10.0, 0.5, 0.1, 0.05, 0.02};
  const ControlInput u{0.03, 0.5};
  const auto d = plant_derivative(s, u, 0.01, 0.0, p, tire);
  CHECK(d.vx_dot == doctest::Approx(-7.4358817818799107).epsilon(1e-12));
  CHECK(d.vy_dot == doctest::Approx(-5.5545762832462887).epsilon(1e-12));
  CHECK(d.omega_dot == doctest::Approx(0.088900393838682069).epsilon(1e-12));
  CHECK(d.ye_dot == doctest::Approx(0.69988667026661968).epsilon(1e-12));
  CHECK(d.theta_e_dot == doctest::Approx(7.0027680649212162e-05).epsilon(1e-9));
}

TEST_CASE("plant derivative: ye=0 removes the denominator") {
  const auto p = table_params();
  const auto tire = default_tire();
  const VehicleState s{12.0, 0.3, 0.05, 0.0, 0.1};
  const ControlInput u{0.02, 0.0};
  const double k = 0.04;
  const auto d = plant_derivative(s, u, k, 0.0, p, tire);
  const double expected =
      s.omega - k * (s.vx * std::cos(s.theta_e) - s.vy * std::sin(s.theta_e));
  CHECK(d.theta_e_dot == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("plant derivative: singular geometry throws") {
  const auto p = table_params();
  const auto tire = default_tire();
  VehicleState s;
  s.vx = 10.0;
  s.ye = 10.0;
  CHECK_THROWS_AS(plant_derivative(s, {0.0, 0.0}, 0.1, 0.0, p, tire), SingularGeometry);
}

TEST_CASE("rk4: derivative-free fixed point and vx floor") {
  VehicleParams p = table_params();
  const auto tire = default_tire();
  // standstill: zero speed, zero inputs -> all derivatives vanish
  VehicleState s;
  const auto next = step_rk4(s, {0.0, 0.0}, 0.0, 0.0, p, tire, 0.01);
  CHECK(next.vx == 0.0);
  CHECK(next.vy == 0.0);
  CHECK(next.omega == 0.0);
  CHECK(next.ye == 0.0);
  CHECK(next.theta_e == 0.0);

  // hard braking from crawl speed cannot push vx negative
  VehicleState crawling;
  crawling.vx = 0.2;
  const auto stopped = step_rk4(crawling, {0.0, -20.0}, 0.0, 0.0, p, tire, 0.5);
  CHECK(stopped.vx >= 0.0);
}

namespace {

VehicleState integrate(VehicleState s, const ControlInput& u, double k, double dt, int steps,
                       const VehicleParams& p, const PacejkaCoeffs& tire) {
  for (int i = 0; i < steps; ++i) s = step_rk4(s, u, k, 0.0, p, tire, dt);
  return s;
}

double state_dist(const VehicleState& a, const VehicleState& b) {
  return std::sqrt(std::pow(a.vx - b.vx, 2) + std::pow(a.vy - b.vy, 2) +
                   std::pow(a.omega - b.omega, 2) + std::pow(a.ye - b.ye, 2) +
                   std::pow(a.theta_e - b.theta_e, 2));
}

}  // namespace

TEST_CASE("rk4: global error drops ~16x when dt halves") {
  const auto p = table_params();
  const auto tire = default_tire();
  const VehicleState s0{15.0, 0.1, 0.05, 0.02, 0.01};
  const ControlInput u{0.05, 2.0};
  const double k = 0.005;

  const auto ref = integrate(s0, u, k, 1.0 / 6400.0, 6400, p, tire);
  const auto coarse = integrate(s0, u, k, 1.0 / 50.0, 50, p, tire);
  const auto fine = integrate(s0, u, k, 1.0 / 100.0, 100, p, tire);
  const double e_coarse = state_dist(coarse, ref);
  const double e_fine = state_dist(fine, ref);
  const double ratio = e_coarse / e_fine;
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("rk4: coasting speed is strictly non-increasing") {
  const auto p = table_params();
  const auto tire = default_tire();
  VehicleState s;
  s.vx = 20.0;
  for (int i = 0; i < 200; ++i) {
    const auto next = step_rk4(s, {0.0, 0.0}, 0.0, 0.0, p, tire, 0.033);
    CHECK(next.vx < s.vx);
    s = next;
    if (s.vx <= 0.2) break;
  }
}
