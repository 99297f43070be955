#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "almpc/ga.hpp"
#include "almpc/mlp.hpp"
#include "almpc/mpc.hpp"
#include "almpc/track.hpp"
#include "almpc/vehicle.hpp"

namespace almpc {

/// Everything describing one closed-loop experiment.
struct ExperimentConfig {
  VehicleParams vehicle;
  PacejkaCoeffs tire;
  MpcConfig mpc;
  TrackSpec track;
  SpeedProfile speed;
  WindProfile wind;
  GaConfig ga;
  bool adaptation = true;
  std::string model_path;
  StiffnessPair nominal_stiffness{0.0, 0.0};  // 0 = use the tire's linear slope
  double duration = 55.0;
  std::uint64_t seed = 1;

  StiffnessPair effective_nominal_stiffness() const;
  void validate() const;  // throws ConfigError

  static ExperimentConfig desk_default();
};

struct RunRecord {
  double t = 0.0;
  double s = 0.0;
  VehicleState state;
  ControlInput u;
  double ddelta = 0.0;
  double dax = 0.0;
  double v_ref = 0.0;
  double k = 0.0;
  double wind = 0.0;
  double cf_hat = 0.0;
  double cr_hat = 0.0;
  int qp_iters = 0;
  double solve_time = 0.0;
  double slack = 0.0;
};

struct RunLog {
  std::vector<RunRecord> records;
  bool aborted = false;
  std::string abort_reason;
};

struct Metrics {
  double rmse_ye = 0.0;
  double rmse_theta_e = 0.0;
  double rmse_vx = 0.0;
  double max_abs_ye = 0.0;
  double max_abs_theta_e = 0.0;
  double max_abs_vx_err = 0.0;
  double mean_solve_time = 0.0;
  double max_solve_time = 0.0;
  long constraint_violations = 0;
  std::size_t records = 0;
};

/// Runs the plant + (optional) stiffness adaptation + LPV-MPC loop on the
/// configured track. `model` may be null when adaptation is off; the run is
/// deterministic given (config, seed). Aborts with a partial log on singular
/// geometry or a cascade of solver iteration exhaustions.
RunLog run_closed_loop(const ExperimentConfig& cfg, const StiffnessModel* model);

/// Convenience overload that loads cfg.model_path when adaptation is on.
RunLog run_closed_loop(const ExperimentConfig& cfg);

Metrics compute_metrics(const RunLog& log, const MpcConfig& mpc);

std::string metrics_to_json(const Metrics& m);

void export_csv(const RunLog& log, const std::string& path);
RunLog import_csv(const std::string& path);

/// GA fitness for weight tuning: 7 genes = 5 Q diagonals + 2 R diagonals,
/// scored by RMSE_ye + RMSE_theta_e + RMSE_vx over the configured scenario.
/// Aborted runs score a large penalty.
double closed_loop_fitness(const std::vector<double>& genes, const ExperimentConfig& scenario,
                           const StiffnessModel* model);

std::vector<GeneBounds> weight_gene_bounds();

/// Applies a gene vector to the scenario's MPC weights.
MpcConfig weights_from_genes(const std::vector<double>& genes, const MpcConfig& base);

struct TuneResult {
  GaResult ga;
  MpcConfig tuned;
};

TuneResult tune_weights(const ExperimentConfig& scenario, const StiffnessModel* model,
                        bool parallel = true);

/// Sphere benchmark across selector variants.
struct SphereBenchConfig {
  int seeds = 20;
  int generations = 100;
  int pop_size = 20;
  int dimension = 5;
  double box = 100.0;  // search box [-box, box]^d
  GaConfig base;       // operator rates; selection/seed overridden per run
};

struct SphereBenchResult {
  std::vector<double> final_hybrid;
  std::vector<double> final_rws;
  std::vector<double> final_ts;
  double mean_hybrid = 0.0;
  double mean_rws = 0.0;
  double mean_ts = 0.0;
  double p_vs_rws = 1.0;  // one-sided sign test, hybrid better
  double p_vs_ts = 1.0;
  std::vector<std::vector<double>> history_hybrid;  // per seed
  std::vector<std::vector<double>> history_rws;
  std::vector<std::vector<double>> history_ts;
};

SphereBenchResult bench_ga_sphere(const SphereBenchConfig& cfg);

/// One-sided sign test: probability of >= wins successes out of n fair coin
/// flips (ties excluded by the caller).
double sign_test_p_value(int wins, int n);

}  // namespace almpc
