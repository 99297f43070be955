#include "almpc/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace almpc {

StiffnessPair ExperimentConfig::effective_nominal_stiffness() const {
  StiffnessPair s = nominal_stiffness;
  if (s.cf <= 0.0) s.cf = tire.linear_stiffness(Axle::Front);
  if (s.cr <= 0.0) s.cr = tire.linear_stiffness(Axle::Rear);
  return s;
}

void ExperimentConfig::validate() const {
  if (!vehicle.valid()) throw ConfigError("config: invalid vehicle parameters");
  if (!mpc.valid()) throw ConfigError("config: invalid mpc parameters");
  if (!track.valid(mpc.ye_bound)) throw ConfigError("config: invalid track");
  if (speed.knots.empty()) throw ConfigError("config: empty speed profile");
  for (std::size_t i = 1; i < speed.knots.size(); ++i) {
    if (speed.knots[i].s < speed.knots[i - 1].s) {
      throw ConfigError("config: speed knots not sorted by arc length");
    }
  }
  if (duration <= 0.0) throw ConfigError("config: duration must be positive");
  if (tire.B <= 0.0 || tire.C <= 1.0 || tire.C >= 3.0) {
    throw ConfigError("config: tire coefficients out of range");
  }
}

ExperimentConfig ExperimentConfig::desk_default() {
  ExperimentConfig cfg;
  cfg.tire = PacejkaCoeffs::from_params(cfg.vehicle);
  cfg.track = desk_track_v1();
  cfg.speed = desk_speed_v1();
  cfg.wind = desk_wind_v1();
  cfg.duration = 65.0;  // covers the full 717 m lap at the stock speed profile
  cfg.seed = 1;
  return cfg;
}

RunLog run_closed_loop(const ExperimentConfig& cfg, const StiffnessModel* model) {
  cfg.validate();
  if (cfg.adaptation && model == nullptr) {
    throw ConfigError("run_closed_loop: adaptation on but no model provided");
  }

  WindProfile wind = cfg.wind;
  wind.seed = cfg.wind.seed ^ (0x9e3779b97f4a7c15ULL * cfg.seed);

  const StiffnessPair nominal = cfg.effective_nominal_stiffness();
  const int Np = cfg.mpc.Np;
  const double Ts = cfg.mpc.Ts;
  const int n_steps = static_cast<int>(std::floor(cfg.duration / Ts));
  constexpr int kSubsteps = 10;

  RunLog log;
  log.records.reserve(static_cast<std::size_t>(n_steps) + 1);

  VehicleState state;
  state.vx = speed_at(cfg.speed, 0.0);
  double s = 0.0;
  ControlInput u_prev{0.0, 0.0};
  std::optional<MpcSolution> prev;
  int exhausted_streak = 0;

  for (int i = 0; i <= n_steps; ++i) {
    const double t = i * Ts;
    const double w = wind_at(wind, t);

    StiffnessPair stiff = nominal;
    if (cfg.adaptation) {
      stiff = model->predict({state.vx, state.vy, u_prev.delta, u_prev.ax, state.omega});
    }

    ReferenceWindow refs;
    refs.v_ref.resize(static_cast<std::size_t>(Np));
    refs.curvature.resize(static_cast<std::size_t>(Np));
    double s_look = s;
    for (int j = 0; j < Np; ++j) {
      refs.v_ref[static_cast<std::size_t>(j)] = speed_at(cfg.speed, s_look);
      refs.curvature[static_cast<std::size_t>(j)] = curvature_at(cfg.track, s_look);
      s_look += Ts * refs.v_ref[static_cast<std::size_t>(j)];
    }

    MpcSolution sol;
    try {
      sol = mpc_step(state, stiff, refs, u_prev, prev, cfg.mpc, cfg.vehicle);
    } catch (const std::runtime_error& e) {
      log.aborted = true;
      log.abort_reason = std::string("controller failure: ") + e.what();
      return log;
    }

    if (sol.status == SolveStatus::MaxIterations) {
      if (++exhausted_streak > 10) {
        log.aborted = true;
        log.abort_reason = "qp iteration cascade: >10 consecutive max_iter solves";
        return log;
      }
    } else {
      exhausted_streak = 0;
    }

    RunRecord rec;
    rec.t = t;
    rec.s = s;
    rec.state = state;
    rec.u = sol.u0;
    rec.ddelta = sol.u0.delta - u_prev.delta;
    rec.dax = sol.u0.ax - u_prev.ax;
    rec.v_ref = refs.v_ref[0];
    rec.k = refs.curvature[0];
    rec.wind = w;
    rec.cf_hat = stiff.cf;
    rec.cr_hat = stiff.cr;
    rec.qp_iters = sol.qp_iterations;
    rec.solve_time = sol.solve_time;
    rec.slack = sol.slack;
    log.records.push_back(rec);

    if (i == n_steps) break;

    try {
      const double dt = Ts / kSubsteps;
      for (int sub = 0; sub < kSubsteps; ++sub) {
        const double k_here = curvature_at(cfg.track, s);
        s = advance_arclength(s, state, k_here, dt);
        state = step_rk4(state, sol.u0, k_here, w, cfg.vehicle, cfg.tire, dt);
      }
    } catch (const SingularGeometry& e) {
      log.aborted = true;
      log.abort_reason = std::string("plant failure: ") + e.what();
      return log;
    }

    u_prev = sol.u0;
    prev = std::move(sol);
  }
  return log;
}

RunLog run_closed_loop(const ExperimentConfig& cfg) {
  if (!cfg.adaptation) return run_closed_loop(cfg, nullptr);
  const StiffnessModel model = StiffnessModel::load(cfg.model_path);
  return run_closed_loop(cfg, &model);
}

Metrics compute_metrics(const RunLog& log, const MpcConfig& mpc) {
  if (log.records.empty()) throw EmptyLog("compute_metrics: empty run log");
  Metrics m;
  m.records = log.records.size();
  double sq_ye = 0.0, sq_te = 0.0, sq_vx = 0.0;
  double time_sum = 0.0;
  constexpr double tol = 1e-9;
  for (const auto& r : log.records) {
    const double vx_err = r.state.vx - r.v_ref;
    sq_ye += r.state.ye * r.state.ye;
    sq_te += r.state.theta_e * r.state.theta_e;
    sq_vx += vx_err * vx_err;
    m.max_abs_ye = std::max(m.max_abs_ye, std::abs(r.state.ye));
    m.max_abs_theta_e = std::max(m.max_abs_theta_e, std::abs(r.state.theta_e));
    m.max_abs_vx_err = std::max(m.max_abs_vx_err, std::abs(vx_err));
    time_sum += r.solve_time;
    m.max_solve_time = std::max(m.max_solve_time, r.solve_time);
    const bool breach = r.u.delta > mpc.u_max(0) + tol || r.u.delta < mpc.u_min(0) - tol ||
                        r.u.ax > mpc.u_max(1) + tol || r.u.ax < mpc.u_min(1) - tol ||
                        r.ddelta > mpc.du_max(0) + tol || r.ddelta < mpc.du_min(0) - tol ||
                        r.dax > mpc.du_max(1) + tol || r.dax < mpc.du_min(1) - tol;
    if (breach) ++m.constraint_violations;
  }
  const auto n = static_cast<double>(log.records.size());
  m.rmse_ye = std::sqrt(sq_ye / n);
  m.rmse_theta_e = std::sqrt(sq_te / n);
  m.rmse_vx = std::sqrt(sq_vx / n);
  m.mean_solve_time = time_sum / n;
  return m;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["rmse_ye"] = m.rmse_ye;
  j["rmse_theta_e"] = m.rmse_theta_e;
  j["rmse_vx"] = m.rmse_vx;
  j["max_abs_ye"] = m.max_abs_ye;
  j["max_abs_theta_e"] = m.max_abs_theta_e;
  j["max_abs_vx_err"] = m.max_abs_vx_err;
  j["mean_solve_time"] = m.mean_solve_time;
  j["max_solve_time"] = m.max_solve_time;
  j["constraint_violations"] = m.constraint_violations;
  j["records"] = m.records;
  return j.dump(2);
}

namespace {
constexpr const char* kCsvHeader =
    "t,s,vx,vy,omega,ye,theta_e,delta,ax,ddelta,dax,v_ref,k,wind,cf_hat,cr_hat,"
    "qp_iters,solve_time,slack";
}

void export_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write run log: " + path);
  out << kCsvHeader << "\n";
  char buf[1024];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  r.t, r.s, r.state.vx, r.state.vy, r.state.omega, r.state.ye,
                  r.state.theta_e, r.u.delta, r.u.ax, r.ddelta, r.dax, r.v_ref, r.k, r.wind,
                  r.cf_hat, r.cr_hat, r.qp_iters, r.solve_time, r.slack);
    out << buf;
  }
  if (!out) throw IoFailure("write failed: " + path);
}

RunLog import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read run log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("empty run log file: " + path);
  if (line != kCsvHeader) throw IoFailure("unexpected run log header in " + path);

  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 19> v{};
    std::stringstream ss(line);
    std::string field;
    for (int j = 0; j < 19; ++j) {
      if (!std::getline(ss, field, ',')) throw IoFailure("short run log row: " + line);
      v[static_cast<std::size_t>(j)] = std::strtod(field.c_str(), nullptr);
    }
    RunRecord r;
    r.t = v[0];
    r.s = v[1];
    r.state = {v[2], v[3], v[4], v[5], v[6]};
    r.u = {v[7], v[8]};
    r.ddelta = v[9];
    r.dax = v[10];
    r.v_ref = v[11];
    r.k = v[12];
    r.wind = v[13];
    r.cf_hat = v[14];
    r.cr_hat = v[15];
    r.qp_iters = static_cast<int>(v[16]);
    r.solve_time = v[17];
    r.slack = v[18];
    log.records.push_back(r);
  }
  return log;
}

std::vector<GeneBounds> weight_gene_bounds() {
  std::vector<GeneBounds> bounds;
  for (int i = 0; i < 5; ++i) bounds.push_back({1e-4, 10.0});  // Q diagonals
  for (int i = 0; i < 2; ++i) bounds.push_back({1e-3, 1.0});   // R diagonals
  return bounds;
}

MpcConfig weights_from_genes(const std::vector<double>& genes, const MpcConfig& base) {
  if (genes.size() != 7) throw DimensionMismatch("weights_from_genes: expected 7 genes");
  MpcConfig cfg = base;
  for (int i = 0; i < 5; ++i) cfg.q_diag(i) = genes[static_cast<std::size_t>(i)];
  cfg.r_diag(0) = genes[5];
  cfg.r_diag(1) = genes[6];
  return cfg;
}

double closed_loop_fitness(const std::vector<double>& genes, const ExperimentConfig& scenario,
                           const StiffnessModel* model) {
  constexpr double kPenalty = 1e6;
  ExperimentConfig cfg = scenario;
  try {
    cfg.mpc = weights_from_genes(genes, scenario.mpc);
    const RunLog log = run_closed_loop(cfg, model);
    if (log.aborted || log.records.empty()) return kPenalty;
    const Metrics m = compute_metrics(log, cfg.mpc);
    if (!std::isfinite(m.rmse_ye + m.rmse_theta_e + m.rmse_vx)) return kPenalty;
    return m.rmse_ye + m.rmse_theta_e + m.rmse_vx;
  } catch (const std::exception&) {
    return kPenalty;
  }
}

TuneResult tune_weights(const ExperimentConfig& scenario, const StiffnessModel* model,
                        bool parallel) {
  const auto fitness = [&scenario, model](const std::vector<double>& genes) {
    return closed_loop_fitness(genes, scenario, model);
  };
  TuneResult result;
  result.ga = run_ga(fitness, weight_gene_bounds(), scenario.ga, parallel);
  result.tuned = weights_from_genes(result.ga.best.genes, scenario.mpc);
  return result;
}

double sign_test_p_value(int wins, int n) {
  if (n <= 0) return 1.0;
  // P[Binomial(n, 1/2) >= wins], exact
  long double p = 0.0L;
  for (int k = wins; k <= n; ++k) {
    long double log_c = 0.0L;
    for (int i = 0; i < k; ++i) {
      log_c += std::log(static_cast<long double>(n - i)) -
               std::log(static_cast<long double>(i + 1));
    }
    p += std::exp(log_c - n * std::log(2.0L));
  }
  return static_cast<double>(std::min<long double>(p, 1.0L));
}

SphereBenchResult bench_ga_sphere(const SphereBenchConfig& cfg) {
  std::vector<GeneBounds> bounds(static_cast<std::size_t>(cfg.dimension),
                                 GeneBounds{-cfg.box, cfg.box});
  SphereBenchResult out;

  const auto run_variant = [&](SelectionMode mode, int seed) {
    GaConfig ga = cfg.base;
    ga.generations = cfg.generations;
    ga.pop_size = cfg.pop_size;
    ga.selection = mode;
    ga.seed = static_cast<std::uint64_t>(seed);
    return run_ga(sphere_fitness, bounds, ga);
  };

  for (int seed = 0; seed < cfg.seeds; ++seed) {
    auto h = run_variant(SelectionMode::Hybrid, seed);
    auto r = run_variant(SelectionMode::RwsOnly, seed);
    auto t = run_variant(SelectionMode::TsOnly, seed);
    out.final_hybrid.push_back(h.best.fitness);
    out.final_rws.push_back(r.best.fitness);
    out.final_ts.push_back(t.best.fitness);
    out.history_hybrid.push_back(std::move(h.history));
    out.history_rws.push_back(std::move(r.history));
    out.history_ts.push_back(std::move(t.history));
  }

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  out.mean_hybrid = mean(out.final_hybrid);
  out.mean_rws = mean(out.final_rws);
  out.mean_ts = mean(out.final_ts);

  const auto sign_test = [&](const std::vector<double>& other) {
    int wins = 0, n = 0;
    for (std::size_t i = 0; i < out.final_hybrid.size(); ++i) {
      if (out.final_hybrid[i] == other[i]) continue;
      ++n;
      if (out.final_hybrid[i] < other[i]) ++wins;
    }
    return sign_test_p_value(wins, n);
  };
  out.p_vs_rws = sign_test(out.final_rws);
  out.p_vs_ts = sign_test(out.final_ts);
  return out;
}

}  // namespace almpc
