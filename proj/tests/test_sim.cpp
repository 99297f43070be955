#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "almpc/config.hpp"
#include "almpc/sim.hpp"

using namespace almpc;

namespace {

// short, windless scenario for fast closed-loop tests
ExperimentConfig quick_scenario() {
  ExperimentConfig cfg = ExperimentConfig::desk_default();
  cfg.track.segments = {{TrackSegment::Kind::Straight, 150.0, 0.0},
                        {TrackSegment::Kind::Arc, 120.0, 0.01},
                        {TrackSegment::Kind::Straight, 200.0, 0.0}};
  cfg.speed.knots = {{0.0, 12.0}, {400.0, 12.0}};
  cfg.wind.base = 0.0;
  cfg.wind.amplitude = 0.0;
  cfg.wind.noise_std = 0.0;
  cfg.wind.clip_lo = 0.0;
  cfg.wind.clip_hi = 0.0;
  cfg.adaptation = false;
  cfg.duration = 10.0;
  return cfg;
}

RunLog constant_error_log(const std::vector<double>& ye_values) {
  RunLog log;
  for (std::size_t i = 0; i < ye_values.size(); ++i) {
    RunRecord r;
    r.t = 0.033 * static_cast<double>(i);
    r.state.ye = ye_values[i];
    r.state.vx = 10.0;
    r.v_ref = 10.0;
    log.records.push_back(r);
  }
  return log;
}

}  // namespace

TEST_CASE("closed loop: record count follows the grid rule") {
  ExperimentConfig cfg = quick_scenario();
  cfg.duration = 10.0;
  const RunLog log = run_closed_loop(cfg, nullptr);
  CHECK_FALSE(log.aborted);
  CHECK(log.records.size() == 304);  // floor(10/0.033) + 1
}

TEST_CASE("closed loop: repeated runs agree on every deterministic channel") {
  const ExperimentConfig cfg = quick_scenario();
  const RunLog a = run_closed_loop(cfg, nullptr);
  const RunLog b = run_closed_loop(cfg, nullptr);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].state.vx == b.records[i].state.vx);
    CHECK(a.records[i].state.ye == b.records[i].state.ye);
    CHECK(a.records[i].state.theta_e == b.records[i].state.theta_e);
    CHECK(a.records[i].u.delta == b.records[i].u.delta);
    CHECK(a.records[i].u.ax == b.records[i].u.ax);
    CHECK(a.records[i].qp_iters == b.records[i].qp_iters);
    CHECK(a.records[i].s == b.records[i].s);
    CHECK(a.records[i].wind == b.records[i].wind);
  }
}

TEST_CASE("closed loop: different seed changes the wind channel") {
  ExperimentConfig cfg = quick_scenario();
  cfg.wind = desk_wind_v1();
  cfg.duration = 3.0;
  const RunLog a = run_closed_loop(cfg, nullptr);
  cfg.seed = 2;
  const RunLog b = run_closed_loop(cfg, nullptr);
  bool wind_differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].wind != b.records[i].wind) wind_differs = true;
  }
  CHECK(wind_differs);
}

TEST_CASE("metrics: trivial and hand-computed cases") {
  MpcConfig mpc;
  SUBCASE("all-zero errors") {
    auto log = constant_error_log(std::vector<double>(10, 0.0));
    const auto m = compute_metrics(log, mpc);
    CHECK(m.rmse_ye == 0.0);
    CHECK(m.rmse_vx == 0.0);
    CHECK(m.rmse_theta_e == 0.0);
    CHECK(m.constraint_violations == 0);
  }
  SUBCASE("constant 0.1 m offset") {
    auto log = constant_error_log(std::vector<double>(25, 0.1));
    CHECK(compute_metrics(log, mpc).rmse_ye == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("alternating signs") {
    auto log = constant_error_log({0.1, -0.1, 0.1, -0.1});
    CHECK(compute_metrics(log, mpc).rmse_ye == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("mixed 4-sample case") {
    auto log = constant_error_log({0.0, 0.1, 0.2, 0.1});
    // sqrt(0.015)
    CHECK(compute_metrics(log, mpc).rmse_ye ==
          doctest::Approx(0.12247448713915890).epsilon(1e-14));
    CHECK(compute_metrics(log, mpc).max_abs_ye == doctest::Approx(0.2));
  }
  SUBCASE("empty log throws") {
    RunLog empty;
    CHECK_THROWS_AS(compute_metrics(empty, mpc), EmptyLog);
  }
}

TEST_CASE("metrics: bound breaches are counted") {
  MpcConfig mpc;
  auto log = constant_error_log({0.0, 0.0, 0.0});
  log.records[1].u.delta = 1.0;  // way past pi/6
  const auto m = compute_metrics(log, mpc);
  CHECK(m.constraint_violations == 1);
}

TEST_CASE("csv: empty log gives a header-only file") {
  RunLog empty;
  const std::string path = "test_sim_empty.csv";
  export_csv(empty, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "t,s,vx,vy,omega,ye,theta_e,delta,ax,ddelta,dax,v_ref,k,wind,cf_hat,cr_hat,"
        "qp_iters,solve_time,slack");
  CHECK_FALSE(std::getline(in, line));
  std::remove(path.c_str());
}

TEST_CASE("csv: export/import round trip is bit exact") {
  ExperimentConfig cfg = quick_scenario();
  cfg.duration = 3.0;
  const RunLog log = run_closed_loop(cfg, nullptr);
  const std::string path = "test_sim_roundtrip.csv";
  export_csv(log, path);
  const RunLog back = import_csv(path);
  REQUIRE(back.records.size() == log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    CHECK(back.records[i].t == log.records[i].t);
    CHECK(back.records[i].s == log.records[i].s);
    CHECK(back.records[i].state.vx == log.records[i].state.vx);
    CHECK(back.records[i].state.vy == log.records[i].state.vy);
    CHECK(back.records[i].state.omega == log.records[i].state.omega);
    CHECK(back.records[i].state.ye == log.records[i].state.ye);
    CHECK(back.records[i].state.theta_e == log.records[i].state.theta_e);
    CHECK(back.records[i].u.delta == log.records[i].u.delta);
    CHECK(back.records[i].u.ax == log.records[i].u.ax);
    CHECK(back.records[i].solve_time == log.records[i].solve_time);
    CHECK(back.records[i].slack == log.records[i].slack);
    CHECK(back.records[i].cf_hat == log.records[i].cf_hat);
  }
  std::remove(path.c_str());
}

TEST_CASE("gentle maneuvers: converged constant model equals nominal stiffness run") {
  // a model that always reports the linear-tire slope (zero weights, slope
  // stored as target mean) must reproduce the fixed-nominal run exactly
  ExperimentConfig cfg = quick_scenario();
  cfg.duration = 5.0;
  const double slope_f = cfg.tire.linear_stiffness(Axle::Front);
  const double slope_r = cfg.tire.linear_stiffness(Axle::Rear);

  StiffnessModel constant_model;
  constant_model.net = Mlp({5, 16, 28, 16, 9, 2}, 0);
  for (auto& w : constant_model.net.weights()) w.setZero();
  for (auto& b : constant_model.net.biases()) b.setZero();
  constant_model.feature_std.mean = Eigen::VectorXd::Zero(5);
  constant_model.feature_std.std = Eigen::VectorXd::Ones(5);
  constant_model.target_std.std = Eigen::VectorXd::Ones(2);
  constant_model.target_std.mean = Eigen::Vector2d{slope_f, slope_r};

  ExperimentConfig on = cfg;
  on.adaptation = true;
  const RunLog log_on = run_closed_loop(on, &constant_model);
  const RunLog log_off = run_closed_loop(cfg, nullptr);  // nominal = slope by default

  REQUIRE(log_on.records.size() == log_off.records.size());
  for (std::size_t i = 0; i < log_on.records.size(); ++i) {
    CHECK(std::abs(log_on.records[i].state.ye - log_off.records[i].state.ye) < 1e-6);
    CHECK(std::abs(log_on.records[i].state.vx - log_off.records[i].state.vx) < 1e-6);
    CHECK(std::abs(log_on.records[i].u.delta - log_off.records[i].u.delta) < 1e-6);
    CHECK(log_on.records[i].cf_hat == doctest::Approx(slope_f).epsilon(1e-12));
  }
}

TEST_CASE("fitness: deterministic, and collapsed state weights drift badly") {
  const ExperimentConfig cfg = quick_scenario();
  const std::vector<double> sane{1.0, 1e-4, 0.1, 8.0, 3.0, 0.05, 0.01};
  const double f1 = closed_loop_fitness(sane, cfg, nullptr);
  const double f2 = closed_loop_fitness(sane, cfg, nullptr);
  CHECK(f1 == f2);
  CHECK(f1 < 1e6);

  // state weights at the bottom of their range: no tracking incentive
  const std::vector<double> numb{1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 0.5, 0.5};
  const double f_numb = closed_loop_fitness(numb, cfg, nullptr);
  CHECK(f_numb > 10.0 * f1);
}

TEST_CASE("sign test: exact binomial tails") {
  CHECK(sign_test_p_value(10, 10) == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-12));
  CHECK(sign_test_p_value(0, 10) == doctest::Approx(1.0).epsilon(1e-12));
  // P[X >= 8 | n=10] = (45 + 10 + 1)/1024
  CHECK(sign_test_p_value(8, 10) == doctest::Approx(56.0 / 1024.0).epsilon(1e-12));
}

TEST_CASE("metrics JSON carries every field") {
  Metrics m;
  m.rmse_ye = 0.01;
  m.records = 7;
  const std::string j = metrics_to_json(m);
  CHECK(j.find("\"rmse_ye\"") != std::string::npos);
  CHECK(j.find("\"mean_solve_time\"") != std::string::npos);
  CHECK(j.find("\"constraint_violations\"") != std::string::npos);
}

TEST_CASE("config: JSON round trip preserves the experiment") {
  ExperimentConfig cfg = ExperimentConfig::desk_default();
  cfg.mpc.q_diag << 0.5, 0.01, 0.2, 7.0, 2.0;
  cfg.adaptation = false;
  cfg.seed = 42;
  const std::string text = experiment_config_to_json(cfg);
  const ExperimentConfig back = parse_experiment_config(text);
  CHECK(back.seed == 42);
  CHECK_FALSE(back.adaptation);
  CHECK(back.mpc.q_diag(3) == doctest::Approx(7.0));
  CHECK(back.track.segments.size() == cfg.track.segments.size());
  CHECK(back.vehicle.m == cfg.vehicle.m);
  CHECK(back.wind.base == cfg.wind.base);
}

TEST_CASE("config: malformed inputs raise ConfigError") {
  CHECK_THROWS_AS(parse_experiment_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"mpc": {"Np": -3}})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"duration": -1.0})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"track": {"segments": []}})"), ConfigError);
}
